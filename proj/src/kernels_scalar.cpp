#include "efla/kernels.hpp"

// Reference lane. Reductions accumulate strictly in index order; the
// compiler may vectorize elementwise loops but must not reassociate the
// dot/sumsq sums under default IEEE semantics.

namespace efla::kernels {
namespace {

double dot_scalar(std::size_t n, const double* a, const double* b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sumsq_scalar(std::size_t n, const double* x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

void axpy_scalar(std::size_t n, double a, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scal_scalar(std::size_t n, double a, double* x) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void mat_tvec_scalar(std::size_t rows, std::size_t cols, const double* s,
                     const double* k, double* out) {
    for (std::size_t j = 0; j < cols; ++j) out[j] = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        const double ki = k[i];
        const double* row = s + i * cols;
        for (std::size_t j = 0; j < cols; ++j) out[j] += ki * row[j];
    }
}

void rank1_update_scalar(std::size_t rows, std::size_t cols, double c,
                         const double* a, const double* b, double* s) {
    for (std::size_t i = 0; i < rows; ++i) {
        const double ca = c * a[i];
        double* row = s + i * cols;
        for (std::size_t j = 0; j < cols; ++j) row[j] += ca * b[j];
    }
}

void rk_stage_scalar(std::size_t rows, std::size_t cols, const double* s,
                     const double* bmat, const double* k, const double* t,
                     double c_y, double w_acc, double* y, double* acc) {
    for (std::size_t i = 0; i < rows; ++i) {
        const double ki = k[i];
        const double* srow = s + i * cols;
        const double* brow = bmat + i * cols;
        double* yrow = y + i * cols;
        double* arow = acc + i * cols;
        for (std::size_t j = 0; j < cols; ++j) {
            const double slope = brow[j] - ki * t[j];
            arow[j] += w_acc * slope;
            yrow[j] = srow[j] + c_y * slope;
        }
    }
}

}  // namespace

const Kernels& scalar() {
    static const Kernels table = {
        "scalar",         dot_scalar,  sumsq_scalar,        axpy_scalar,
        scal_scalar,      mat_tvec_scalar, rank1_update_scalar, rk_stage_scalar,
    };
    return table;
}

}  // namespace efla::kernels
