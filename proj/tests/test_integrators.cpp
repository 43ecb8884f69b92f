#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "efla/integrators.hpp"

using namespace efla;

TEST_SUITE("integrators") {
    TEST_CASE("method parsing and names") {
        CHECK(Method::parse("vanilla").kind == MethodKind::VanillaLinear);
        CHECK(Method::parse("euler").kind == MethodKind::DeltaEuler);
        CHECK(Method::parse("rk2").kind == MethodKind::RK2);
        CHECK(Method::parse("rk4").kind == MethodKind::RK4);
        CHECK(Method::parse("rk7").kind == MethodKind::RKN);
        CHECK(Method::parse("rk7").order == 7);
        CHECK(Method::parse("efla").kind == MethodKind::ExactEFLA);
        CHECK(Method::parse("reference").substeps == 1024);
        CHECK(Method::parse("reference:64").substeps == 64);

        CHECK(Method::euler().name() == "euler");
        CHECK(Method::rkn(6).name() == "rk6");
        CHECK(Method::reference(64).name() == "reference");
        CHECK(Method::parse(Method::vanilla().name()).kind == MethodKind::VanillaLinear);

        CHECK_THROWS_AS(Method::parse("bogus"), std::invalid_argument);
        CHECK_THROWS_AS(Method::parse("rk0"), std::invalid_argument);
        CHECK_THROWS_AS(Method::parse("rkx"), std::invalid_argument);
        CHECK_THROWS_AS(Method::parse("reference:0"), std::invalid_argument);
        CHECK_THROWS_AS(Method::rkn(0), std::invalid_argument);
        CHECK_THROWS_AS(Method::reference(0), std::invalid_argument);

        CHECK(Method::euler().is_ode_family());
        CHECK(Method::efla().is_ode_family());
        CHECK_FALSE(Method::vanilla().is_ode_family());
        CHECK_FALSE(Method::reference(8).is_ode_family());
    }

    TEST_CASE("series_phi") {
        CHECK(series_phi(1, 1.0) == std::pair<double, double>{0.0, 1.0});
        const auto [phi0, phi1] = series_phi(4, 1.0);
        CHECK(phi0 == doctest::Approx(0.375).epsilon(1e-15));
        CHECK(phi1 == doctest::Approx(0.625).epsilon(1e-15));
        CHECK_THROWS_AS(series_phi(0, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(series_phi(3, -1.0), std::invalid_argument);
    }

    TEST_CASE("coefficients") {
        const StepCoefficients e = coefficients(Method::euler(), 0.7, 3.0);
        CHECK(e.c_transition == 0.7);
        CHECK(e.c_input == 0.7);
        const StepCoefficients v = coefficients(Method::vanilla(), 0.7, 3.0);
        CHECK(v.c_transition == 0.0);
        CHECK(v.c_input == 1.0);  // vanilla writes are not duration-weighted
        const StepCoefficients f = coefficients(Method::efla(), 1.0, 1.0);
        CHECK(f.c_transition == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
        CHECK(f.c_transition == f.c_input);

        CHECK_THROWS_AS(coefficients(Method::reference(8), 1.0, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(coefficients(Method::euler(), -1.0, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(coefficients(Method::euler(), 1.0, -1.0), std::invalid_argument);
    }

    TEST_CASE("step argument validation") {
        const Mat s(2, 3);
        CHECK_THROWS_AS(step(Method::efla(), s, {Vec{1.0}, Vec{1.0, 2.0, 3.0}, 1.0}),
                        std::invalid_argument);
        CHECK_THROWS_AS(step(Method::efla(), s, {Vec{1.0, 2.0}, Vec{1.0}, 1.0}),
                        std::invalid_argument);
        CHECK_THROWS_AS(step(Method::efla(), s, {Vec{1.0, 2.0}, Vec{1.0, 2.0, 3.0}, -1.0}),
                        std::invalid_argument);
        CHECK_THROWS_AS(reference_step(s, {Vec{1.0, 2.0}, Vec{1.0, 2.0, 3.0}, 1.0}, 0),
                        std::invalid_argument);
    }

    TEST_CASE("step and step_inplace agree") {
        Mat s(2, 2, {1.0, 2.0, 3.0, 4.0});
        const StepInput in{Vec{0.5, -0.3}, Vec{1.0, -1.0}, 0.9};
        const Mat expect = step(Method::rk2(), s, in);
        Vec scratch(2);
        step_inplace(Method::rk2(), s, in, scratch);
        CHECK(s == expect);
    }

    TEST_CASE("a zero-duration step is the identity") {
        const Mat s(2, 2, {1.0, 2.0, 3.0, 4.0});
        const StepInput in{Vec{0.5, -0.3}, Vec{1.0, -1.0}, 0.0};
        for (const Method& m : {Method::euler(), Method::rk4(), Method::efla()})
            CHECK(step(m, s, in) == s);
        CHECK(reference_step(s, in, 16) == s);
    }

    TEST_CASE("explicit operators") {
        const StepInput in{Vec{1.0, 0.0}, Vec{2.0}, 0.5};
        // euler: transition = I - beta k k^T, input = beta k v^T
        const ExplicitOperators ops = explicit_operators(Method::euler(), in);
        CHECK(ops.transition.at(0, 0) == 0.5);
        CHECK(ops.transition.at(1, 1) == 1.0);
        CHECK(ops.input_term.at(0, 0) == 1.0);
        CHECK(ops.input_term.at(1, 0) == 0.0);

        CHECK_THROWS_AS(explicit_operators(Method::vanilla(), in), std::invalid_argument);
        CHECK_THROWS_AS(explicit_operators(Method::reference(8), in), std::invalid_argument);
    }
}
