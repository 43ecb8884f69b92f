#include "efla/kernels.hpp"

// AVX2 + FMA lane, 4 doubles per vector. Reductions run four partial sums
// per accumulator register and fold at the end, so results differ from the
// scalar lane by reassociation only. Tails are handled with plain loops.

#if defined(EFLA_WITH_AVX2)

#include <immintrin.h>

namespace efla::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(std::size_t n, const double* a, const double* b) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sumsq_avx2(std::size_t n, const double* x) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d v0 = _mm256_loadu_pd(x + i);
        __m256d v1 = _mm256_loadu_pd(x + i + 4);
        acc0 = _mm256_fmadd_pd(v0, v0, acc0);
        acc1 = _mm256_fmadd_pd(v1, v1, acc1);
    }
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        acc0 = _mm256_fmadd_pd(v, v, acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

void axpy_avx2(std::size_t n, double a, const double* x, double* y) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scal_avx2(std::size_t n, double a, double* x) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) x[i] *= a;
}

void mat_tvec_avx2(std::size_t rows, std::size_t cols, const double* s,
                   const double* k, double* out) {
    // Column tiles live in registers across the row sweep; each column still
    // accumulates in strict row order, so rounding matches the scalar lane's
    // index-order definition.
    std::size_t j = 0;
    for (; j + 16 <= cols; j += 16) {
        __m256d a0 = _mm256_setzero_pd();
        __m256d a1 = _mm256_setzero_pd();
        __m256d a2 = _mm256_setzero_pd();
        __m256d a3 = _mm256_setzero_pd();
        const double* col = s + j;
        for (std::size_t i = 0; i < rows; ++i, col += cols) {
            const __m256d ki = _mm256_set1_pd(k[i]);
            a0 = _mm256_fmadd_pd(ki, _mm256_loadu_pd(col), a0);
            a1 = _mm256_fmadd_pd(ki, _mm256_loadu_pd(col + 4), a1);
            a2 = _mm256_fmadd_pd(ki, _mm256_loadu_pd(col + 8), a2);
            a3 = _mm256_fmadd_pd(ki, _mm256_loadu_pd(col + 12), a3);
        }
        _mm256_storeu_pd(out + j, a0);
        _mm256_storeu_pd(out + j + 4, a1);
        _mm256_storeu_pd(out + j + 8, a2);
        _mm256_storeu_pd(out + j + 12, a3);
    }
    for (; j + 4 <= cols; j += 4) {
        __m256d a0 = _mm256_setzero_pd();
        const double* col = s + j;
        for (std::size_t i = 0; i < rows; ++i, col += cols) {
            a0 = _mm256_fmadd_pd(_mm256_set1_pd(k[i]), _mm256_loadu_pd(col), a0);
        }
        _mm256_storeu_pd(out + j, a0);
    }
    for (; j < cols; ++j) {
        double a = 0.0;
        const double* col = s + j;
        for (std::size_t i = 0; i < rows; ++i, col += cols) a += k[i] * *col;
        out[j] = a;
    }
}

void rank1_update_avx2(std::size_t rows, std::size_t cols, double c,
                       const double* a, const double* b, double* s) {
    for (std::size_t i = 0; i < rows; ++i) {
        const double cas = c * a[i];
        const __m256d ca = _mm256_set1_pd(cas);
        double* row = s + i * cols;
        std::size_t j = 0;
        for (; j + 4 <= cols; j += 4) {
            __m256d vr = _mm256_loadu_pd(row + j);
            vr = _mm256_fmadd_pd(ca, _mm256_loadu_pd(b + j), vr);
            _mm256_storeu_pd(row + j, vr);
        }
        for (; j < cols; ++j) row[j] += cas * b[j];
    }
}

void rk_stage_avx2(std::size_t rows, std::size_t cols, const double* s,
                   const double* bmat, const double* k, const double* t,
                   double c_y, double w_acc, double* y, double* acc) {
    const __m256d vcy = _mm256_set1_pd(c_y);
    const __m256d vw = _mm256_set1_pd(w_acc);
    for (std::size_t i = 0; i < rows; ++i) {
        const double kis = k[i];
        const __m256d ki = _mm256_set1_pd(kis);
        const double* srow = s + i * cols;
        const double* brow = bmat + i * cols;
        double* yrow = y + i * cols;
        double* arow = acc + i * cols;
        std::size_t j = 0;
        for (; j + 4 <= cols; j += 4) {
            __m256d slope = _mm256_fnmadd_pd(ki, _mm256_loadu_pd(t + j),
                                             _mm256_loadu_pd(brow + j));
            __m256d va = _mm256_loadu_pd(arow + j);
            _mm256_storeu_pd(arow + j, _mm256_fmadd_pd(vw, slope, va));
            __m256d vs = _mm256_loadu_pd(srow + j);
            _mm256_storeu_pd(yrow + j, _mm256_fmadd_pd(vcy, slope, vs));
        }
        for (; j < cols; ++j) {
            const double slope = brow[j] - kis * t[j];
            arow[j] += w_acc * slope;
            yrow[j] = srow[j] + c_y * slope;
        }
    }
}

}  // namespace

const Kernels* avx2_table() {
    static const Kernels table = {
        "avx2",      dot_avx2,      sumsq_avx2,        axpy_avx2,
        scal_avx2,   mat_tvec_avx2, rank1_update_avx2, rk_stage_avx2,
    };
    return &table;
}

}  // namespace efla::kernels

#else

namespace efla::kernels {
const Kernels* avx2_table() { return nullptr; }
}  // namespace efla::kernels

#endif  // EFLA_WITH_AVX2
