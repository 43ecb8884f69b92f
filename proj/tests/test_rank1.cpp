#include <cmath>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "efla/rank1.hpp"

using namespace efla;

TEST_SUITE("rank1") {
    TEST_CASE("gate_g") {
        CHECK(gate_g(0.0) == 1.0);
        CHECK(gate_g(1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
        // g(x) - 1/x = -e^{-x}/x, so at x=20 the gap to 1/x is ~e^{-20} relative
        CHECK(gate_g(20.0) == doctest::Approx(1.0 / 20.0).epsilon(1e-7));
        CHECK_THROWS_AS(gate_g(-0.5), std::invalid_argument);
        CHECK_THROWS_AS(gate_g(std::numeric_limits<double>::infinity()), std::invalid_argument);
        CHECK_THROWS_AS(gate_g(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
    }

    TEST_CASE("decay_gate") {
        CHECK(decay_gate(0.1, 0.0).alpha == 0.1);  // lambda = 0: no decay, alpha = beta
        const DecayGate g = decay_gate(1.0, 1.0);
        CHECK(g.alpha == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
        for (double beta : {0.2, 1.0, 3.0})
            for (double lambda : {0.5, 1.0, 4.0}) CHECK(decay_gate(beta, lambda).alpha < beta);
        CHECK_THROWS_AS(decay_gate(-1.0, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(decay_gate(1.0, -1.0), std::invalid_argument);
    }

    TEST_CASE("transition operators") {
        const Vec k{1.0, 0.0};
        const Mat t = transition_matrix(k, 0.25);  // I - 0.25 k k^T
        CHECK(t.at(0, 0) == 0.75);
        CHECK(t.at(0, 1) == 0.0);
        CHECK(t.at(1, 1) == 1.0);

        const Mat s(2, 2, {1.0, 2.0, 3.0, 4.0});
        CHECK(apply_transition(k, 0.25, s) == matmul(t, s));
        CHECK_THROWS_AS(apply_transition(Vec{1.0, 2.0, 3.0}, 0.1, s), std::invalid_argument);
    }

    TEST_CASE("rank1_power_coefficient") {
        const Vec k{0.0, 2.0};  // lambda = 4
        CHECK(rank1_power_coefficient(k, 1) == 1.0);
        CHECK(rank1_power_coefficient(k, 2) == 4.0);
        CHECK(rank1_power_coefficient(k, 4) == 64.0);  // lambda^3
        CHECK_THROWS_AS(rank1_power_coefficient(k, 0), std::invalid_argument);
    }
}
