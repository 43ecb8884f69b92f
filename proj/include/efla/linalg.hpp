#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace efla {

// Dense vector of 64-bit floats. Construction from user data rejects
// NaN/Inf entries; in-place mutation through data()/operator[] is not
// re-validated (scans deliberately let diverging state propagate).
class Vec {
public:
    Vec() = default;
    explicit Vec(std::size_t n) : x_(n, 0.0) {}
    Vec(std::initializer_list<double> init);
    explicit Vec(std::vector<double> init);

    std::size_t size() const { return x_.size(); }
    double& operator[](std::size_t i) { return x_[i]; }
    double operator[](std::size_t i) const { return x_[i]; }
    double* data() { return x_.data(); }
    const double* data() const { return x_.data(); }
    std::span<const double> span() const { return {x_.data(), x_.size()}; }
    std::span<double> span() { return {x_.data(), x_.size()}; }

    bool operator==(const Vec&) const = default;

private:
    std::vector<double> x_;
};

// Dense row-major matrix of 64-bit floats, same validation policy as Vec.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), x_(rows * cols, 0.0) {}
    Mat(std::size_t rows, std::size_t cols, std::initializer_list<double> init);
    Mat(std::size_t rows, std::size_t cols, std::vector<double> init);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return x_.size(); }
    double& at(std::size_t i, std::size_t j) { return x_[i * cols_ + j]; }
    double at(std::size_t i, std::size_t j) const { return x_[i * cols_ + j]; }
    double* data() { return x_.data(); }
    const double* data() const { return x_.data(); }
    std::span<double> row(std::size_t i) { return {x_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {x_.data() + i * cols_, cols_}; }

    bool operator==(const Mat&) const = default;

    static Mat identity(std::size_t n);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> x_;
};

double dot(const Vec& a, const Vec& b);
double dot(std::span<const double> a, std::span<const double> b);

// M_ij = a_i b_j; rank <= 1 by construction.
Mat outer(const Vec& a, const Vec& b);
Mat outer(std::span<const double> a, std::span<const double> b);

// S^T q. rows(S) must equal len(q).
Vec matvec_transposed(const Mat& s, const Vec& q);
void matvec_transposed(const Mat& s, std::span<const double> q, std::span<double> out);

// Solves L X = B by forward substitution for a unit-lower-triangular L.
// Accumulation order is fixed, so the result is a pure function of the
// inputs under the active kernel lane. Throws if the diagonal is not
// exactly 1 or the strict upper triangle is nonzero.
Mat unit_lower_solve(const Mat& lmat, const Mat& b);

// Dense helpers shared by the test oracles and the chunkwise path.
Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);
Mat add(const Mat& a, const Mat& b);
Mat sub(const Mat& a, const Mat& b);
Mat scaled(const Mat& a, double c);
double frobenius_norm(const Mat& a);
double max_abs(const Mat& a);
double max_abs_diff(const Mat& a, const Mat& b);
double max_abs_diff(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
bool all_finite(std::span<const double> a);

}  // namespace efla
