#include "efla/rng.hpp"

#include <cmath>
#include <numbers>

namespace efla {

double SplitMix64::next_gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = 1.0 - next_double();
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

SplitMix64 derive_stream(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 mix(seed);
    std::uint64_t a = mix.next_u64();
    SplitMix64 mix2(a ^ (index * 0xD6E8FEB86659FD93ULL));
    return SplitMix64(mix2.next_u64());
}

}  // namespace efla
