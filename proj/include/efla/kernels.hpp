#pragma once

#include <cstddef>

namespace efla::kernels {

// Low-level kernels on contiguous double arrays. Two lanes: a scalar
// reference (sequential accumulation order, the semantic baseline) and an
// AVX2+FMA variant whose reductions are reassociated across vector lanes.
// Selection happens once per process: select() > EFLA_KERNELS env var >
// CPU detection. The lanes are equivalence-tested in tests/test_kernels.cpp.
struct Kernels {
    const char* name;

    // sum_i a[i]*b[i]
    double (*dot)(std::size_t n, const double* a, const double* b);

    // sum_i x[i]^2
    double (*sumsq)(std::size_t n, const double* x);

    // y += a*x
    void (*axpy)(std::size_t n, double a, const double* x, double* y);

    // x *= a
    void (*scal)(std::size_t n, double a, double* x);

    // out = S^T k. S is row-major rows x cols, k has length rows,
    // out has length cols. Rows are accumulated in index order.
    void (*mat_tvec)(std::size_t rows, std::size_t cols, const double* s,
                     const double* k, double* out);

    // S += c * a b^T
    void (*rank1_update)(std::size_t rows, std::size_t cols, double c,
                         const double* a, const double* b, double* s);

    // One fused explicit-RK stage pass for the matrix ODE dS/dt = B - k(k^T S),
    // where B = k v^T is fixed and t = Y_prev^T k was computed by mat_tvec.
    // For every entry:
    //   slope     = bmat[i*cols+j] - k[i]*t[j]
    //   acc[i,j] += w_acc * slope
    //   y[i,j]    = s[i,j] + c_y * slope
    // y may alias neither s nor acc.
    void (*rk_stage)(std::size_t rows, std::size_t cols, const double* s,
                     const double* bmat, const double* k, const double* t,
                     double c_y, double w_acc, double* y, double* acc);
};

const Kernels& scalar();

// AVX2 lane compiled in and supported by this CPU.
bool avx2_available();

// Current selection.
const Kernels& active();

// "scalar", "avx2" or "auto". Throws std::invalid_argument on an unknown
// name or when the requested lane is unavailable.
void select(const char* name);

}  // namespace efla::kernels

namespace efla {
using kernels::active;
using kernels::Kernels;
}  // namespace efla
