#include "efla/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace efla::kernels {

const Kernels* avx2_table();  // defined in kernels_avx2.cpp, null if not built

namespace {

bool cpu_has_avx2() {
#if defined(__GNUC__) || defined(__clang__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Kernels* resolve(const char* name) {
    if (std::strcmp(name, "scalar") == 0) return &scalar();
    if (std::strcmp(name, "avx2") == 0) {
        if (!avx2_available())
            throw std::invalid_argument("kernels: avx2 not available on this machine");
        return avx2_table();
    }
    if (std::strcmp(name, "auto") == 0)
        return avx2_available() ? avx2_table() : &scalar();
    throw std::invalid_argument(std::string("kernels: unknown lane '") + name + "'");
}

std::atomic<const Kernels*> g_active{nullptr};

const Kernels* init_from_env() {
    const char* env = std::getenv("EFLA_KERNELS");
    return resolve(env && *env ? env : "auto");
}

}  // namespace

bool avx2_available() {
    return avx2_table() != nullptr && cpu_has_avx2();
}

const Kernels& active() {
    const Kernels* k = g_active.load(std::memory_order_acquire);
    if (!k) {
        k = init_from_env();
        g_active.store(k, std::memory_order_release);
    }
    return *k;
}

void select(const char* name) {
    g_active.store(resolve(name), std::memory_order_release);
}

}  // namespace efla::kernels
