#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "efla/harness.hpp"

using namespace efla;

TEST_SUITE("harness") {
    TEST_CASE("scheme names round-trip") {
        for (KeyScheme s :
             {KeyScheme::Orthonormal, KeyScheme::GaussianNormalized, KeyScheme::GaussianRaw})
            CHECK(parse_scheme(scheme_name(s)) == s);
        CHECK_THROWS_AS(parse_scheme("bogus"), std::invalid_argument);
    }

    TEST_CASE("perturbation factories validate parameters") {
        CHECK_THROWS_AS(PerturbationSpec::dropout(-0.1), std::invalid_argument);
        CHECK_THROWS_AS(PerturbationSpec::dropout(1.5), std::invalid_argument);
        CHECK_THROWS_AS(PerturbationSpec::scale(0.0), std::invalid_argument);
        CHECK_THROWS_AS(PerturbationSpec::scale(-2.0), std::invalid_argument);
        CHECK_THROWS_AS(PerturbationSpec::gaussian(-1.0), std::invalid_argument);
        CHECK(PerturbationSpec::none().name() == "none");
        CHECK(PerturbationSpec::scale(2.0).name() == "scale");
        CHECK(PerturbationSpec::dropout(0.5).name() == "dropout");
        CHECK(PerturbationSpec::gaussian(0.1).name() == "gaussian");
    }

    TEST_CASE("task generation preconditions") {
        CHECK_THROWS_AS(gen_recall(1, 0, 4, 3, KeyScheme::Orthonormal), std::invalid_argument);
        CHECK_THROWS_AS(gen_recall(1, 9, 8, 3, KeyScheme::Orthonormal), std::invalid_argument);
        CHECK_NOTHROW(gen_recall(1, 9, 8, 3, KeyScheme::GaussianRaw));
        CHECK_THROWS_AS(gen_repeated_recall(1, 0, 4, 4), std::invalid_argument);

        const RecallTask t = gen_recall(1, 5, 6, 3, KeyScheme::Orthonormal);
        CHECK(t.store_len == 5);
        CHECK(t.batch.length() == 10);
        CHECK(t.targets.rows() == 5);
        CHECK(t.scheme_label == "orthonormal");
        // store tokens never read; query tokens never write
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(norm2(t.batch.q.row(i)) == 0.0);
            CHECK(norm2(t.batch.k.row(5 + i)) == 0.0);
            CHECK(norm2(t.batch.v.row(5 + i)) == 0.0);
        }
    }

    TEST_CASE("stability sweep validates and pins the vanilla row") {
        CHECK_THROWS_AS(stability_sweep({1.0}, 0, {Method::euler()}), std::invalid_argument);
        CHECK_THROWS_AS(stability_sweep({-1.0}, 8, {Method::euler()}), std::invalid_argument);
        const auto rows = stability_sweep({2.0}, 12, {Method::vanilla(), Method::euler()});
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].method == "vanilla");
        CHECK(rows[0].measured_factor == 1.0);
        CHECK(rows[0].predicted_factor == 1.0);
        CHECK(rows[1].predicted_factor == 1.0);  // |1 - 2|
        CHECK(rows[1].abs_error < 1e-12);
    }

    TEST_CASE("rk_convergence validates and hits the analytic corner") {
        CHECK_THROWS_AS(rk_convergence(0, 1.0, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(rk_convergence(5, 1.0, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(rk_convergence(5, -1.0, 1.0), std::invalid_argument);
        const auto rows = rk_convergence(4, 1.0, 1.0);
        REQUIRE(rows.size() == 4);
        CHECK(rows[0].order == 1);
        CHECK(rows[0].error == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
        CHECK(rows[3].error == doctest::Approx((1.0 - std::exp(-1.0)) - 0.625).epsilon(1e-9));
        for (const auto& r : rows) CHECK(r.error <= r.bound);
    }

    TEST_CASE("csv serialization") {
        CHECK(format_double(1.0) == "1");
        CHECK(format_double(-2.5) == "-2.5");
        const std::string third = format_double(1.0 / 3.0);
        CHECK(std::strtod(third.c_str(), nullptr) == 1.0 / 3.0);

        const auto rows = rk_convergence(3, 1.0, 1.0);
        const std::string csv = to_csv(rows);
        CHECK(csv.rfind("order,x,error,bound,ratio\n", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

        CHECK(to_csv(std::vector<StabilityRow>{}) ==
              "x,method,measured_factor,predicted_factor,abs_error\n");
    }

    TEST_CASE("write_file reports unwritable paths") {
        CHECK_THROWS_AS(write_file("/nonexistent-dir/out.csv", "x"), std::runtime_error);
    }

    TEST_CASE("eval_recall end to end on an orthonormal task") {
        const RecallTask task = gen_recall(3, 4, 4, 4, KeyScheme::Orthonormal);
        const TrialReport rep = eval_recall(Method::euler(), task, PerturbationSpec::none(), 3);
        CHECK(rep.method == "euler");
        CHECK(rep.scheme == "orthonormal");
        CHECK(rep.perturbation == "none");
        CHECK(rep.mse < 1e-20);
        CHECK(rep.cosine == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rep.divergence_index == -1);
    }
}
