#include "efla/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "efla/kernels.hpp"

namespace efla {

namespace {

void require_finite(std::span<const double> x, const char* what) {
    for (double v : x) {
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": non-finite entry");
    }
}

}  // namespace

Vec::Vec(std::initializer_list<double> init) : x_(init) {
    require_finite(x_, "Vec");
}

Vec::Vec(std::vector<double> init) : x_(std::move(init)) {
    require_finite(x_, "Vec");
}

Mat::Mat(std::size_t rows, std::size_t cols, std::initializer_list<double> init)
    : rows_(rows), cols_(cols), x_(init) {
    if (x_.size() != rows * cols) throw std::invalid_argument("Mat: init size mismatch");
    require_finite(x_, "Mat");
}

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> init)
    : rows_(rows), cols_(cols), x_(std::move(init)) {
    if (x_.size() != rows * cols) throw std::invalid_argument("Mat: init size mismatch");
    require_finite(x_, "Mat");
}

Mat Mat::identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
    return active().dot(a.size(), a.data(), b.data());
}

double dot(const Vec& a, const Vec& b) { return dot(a.span(), b.span()); }

Mat outer(std::span<const double> a, std::span<const double> b) {
    Mat m(a.size(), b.size());
    active().rank1_update(a.size(), b.size(), 1.0, a.data(), b.data(), m.data());
    return m;
}

Mat outer(const Vec& a, const Vec& b) { return outer(a.span(), b.span()); }

void matvec_transposed(const Mat& s, std::span<const double> q, std::span<double> out) {
    if (s.rows() != q.size()) throw std::invalid_argument("matvec_transposed: rows(S) != len(q)");
    if (s.cols() != out.size()) throw std::invalid_argument("matvec_transposed: cols(S) != len(out)");
    active().mat_tvec(s.rows(), s.cols(), s.data(), q.data(), out.data());
}

Vec matvec_transposed(const Mat& s, const Vec& q) {
    Vec out(s.cols());
    matvec_transposed(s, q.span(), out.span());
    return out;
}

Mat unit_lower_solve(const Mat& lmat, const Mat& b) {
    const std::size_t n = lmat.rows();
    if (lmat.cols() != n) throw std::invalid_argument("unit_lower_solve: L not square");
    if (b.rows() != n) throw std::invalid_argument("unit_lower_solve: rows(B) != rows(L)");
    for (std::size_t i = 0; i < n; ++i) {
        if (lmat.at(i, i) != 1.0) throw std::invalid_argument("unit_lower_solve: diagonal not unit");
        for (std::size_t j = i + 1; j < n; ++j) {
            if (lmat.at(i, j) != 0.0) throw std::invalid_argument("unit_lower_solve: upper triangle nonzero");
        }
    }
    Mat x = b;
    // Row i depends only on rows < i, so one forward pass suffices.
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            active().axpy(x.cols(), -lmat.at(i, j), x.data() + j * x.cols(), x.data() + i * x.cols());
        }
    }
    return x;
}

Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dims mismatch");
    Mat c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            active().axpy(b.cols(), a.at(i, k), b.data() + k * b.cols(), c.data() + i * b.cols());
        }
    }
    return c;
}

Mat transpose(const Mat& a) {
    Mat t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t.at(j, i) = a.at(i, j);
    return t;
}

Mat add(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("add: shape mismatch");
    Mat c = a;
    active().axpy(c.size(), 1.0, b.data(), c.data());
    return c;
}

Mat sub(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("sub: shape mismatch");
    Mat c = a;
    active().axpy(c.size(), -1.0, b.data(), c.data());
    return c;
}

Mat scaled(const Mat& a, double c) {
    Mat out = a;
    active().scal(out.size(), c, out.data());
    return out;
}

double frobenius_norm(const Mat& a) {
    return std::sqrt(active().sumsq(a.size(), a.data()));
}

double max_abs(const Mat& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i]));
    return m;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("max_abs_diff: size mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double max_abs_diff(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("max_abs_diff: shape mismatch");
    return max_abs_diff(std::span<const double>(a.data(), a.size()),
                        std::span<const double>(b.data(), b.size()));
}

double norm2(std::span<const double> a) {
    return std::sqrt(active().sumsq(a.size(), a.data()));
}

bool all_finite(std::span<const double> a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace efla
