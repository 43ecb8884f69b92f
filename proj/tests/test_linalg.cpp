#include <cmath>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "efla/linalg.hpp"

using namespace efla;

TEST_SUITE("linalg") {
    TEST_CASE("construction validates user data") {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        const double inf = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(Vec({1.0, nan}), std::invalid_argument);
        CHECK_THROWS_AS(Vec({inf}), std::invalid_argument);
        CHECK_THROWS_AS(Mat(2, 2, {1.0, 2.0, 3.0}), std::invalid_argument);
        CHECK_NOTHROW(Vec({1.0, -2.0}));

        // in-place mutation deliberately bypasses validation
        Vec v(2);
        v[0] = inf;
        CHECK_FALSE(all_finite(v.span()));
    }

    TEST_CASE("shape mismatches throw") {
        CHECK_THROWS_AS(dot(Vec{1.0}, Vec{1.0, 2.0}), std::invalid_argument);
        CHECK_THROWS_AS(matvec_transposed(Mat(2, 3), Vec{1.0}), std::invalid_argument);
        CHECK_THROWS_AS(matmul(Mat(2, 3), Mat(2, 3)), std::invalid_argument);
        CHECK_THROWS_AS(add(Mat(2, 3), Mat(3, 2)), std::invalid_argument);
        CHECK_THROWS_AS(sub(Mat(2, 3), Mat(3, 2)), std::invalid_argument);
        CHECK_THROWS_AS(max_abs_diff(Mat(2, 2), Mat(2, 3)), std::invalid_argument);
    }

    TEST_CASE("basic identities") {
        CHECK(dot(Vec{1.0, 2.0, 3.0}, Vec{4.0, 5.0, 6.0}) == 32.0);
        const Mat m = outer(Vec{1.0, 2.0}, Vec{3.0, 4.0});
        CHECK(m.at(0, 0) == 3.0);
        CHECK(m.at(1, 0) == 6.0);
        CHECK(m.at(1, 1) == 8.0);

        const Mat s(2, 2, {1.0, 2.0, 3.0, 4.0});
        const Vec q{1.0, 10.0};
        const Vec out = matvec_transposed(s, q);
        CHECK(out[0] == 31.0);
        CHECK(out[1] == 42.0);

        CHECK(matmul(Mat::identity(3), Mat::identity(3)) == Mat::identity(3));
        CHECK(transpose(transpose(s)) == s);
        CHECK(frobenius_norm(Mat(1, 2, {3.0, 4.0})) == 5.0);
        CHECK(max_abs(Mat(1, 2, {-7.0, 2.0})) == 7.0);
        CHECK(norm2(Vec{3.0, 4.0}.span()) == 5.0);
        CHECK(scaled(s, 2.0).at(1, 1) == 8.0);
        CHECK(sub(add(s, s), s) == s);
    }

    TEST_CASE("unit_lower_solve") {
        CHECK_THROWS_AS(unit_lower_solve(Mat(2, 3), Mat(2, 1)), std::invalid_argument);
        CHECK_THROWS_AS(unit_lower_solve(Mat::identity(2), Mat(3, 1)), std::invalid_argument);
        // non-unit diagonal
        CHECK_THROWS_AS(unit_lower_solve(Mat(2, 2, {2.0, 0.0, 0.0, 1.0}), Mat(2, 1)),
                        std::invalid_argument);
        // nonzero upper triangle
        CHECK_THROWS_AS(unit_lower_solve(Mat(2, 2, {1.0, 0.5, 0.0, 1.0}), Mat(2, 1)),
                        std::invalid_argument);

        // L = [[1,0],[2,1]], B = [[1],[0]]: X = [[1],[-2]]
        const Mat x = unit_lower_solve(Mat(2, 2, {1.0, 0.0, 2.0, 1.0}), Mat(2, 1, {1.0, 0.0}));
        CHECK(x.at(0, 0) == 1.0);
        CHECK(x.at(1, 0) == -2.0);

        CHECK(unit_lower_solve(Mat::identity(3), Mat::identity(3)) == Mat::identity(3));
    }
}
