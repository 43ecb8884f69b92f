#include <algorithm>
#include <string>

#include "doctest.h"
#include "efla/verify.hpp"

using namespace efla;

TEST_SUITE("verify") {
    TEST_CASE("suite registry") {
        const auto names = verify::suite_names();
        CHECK(names.size() == 14);
        for (const char* expected : {"numerics", "step-oracle", "equivalence", "recall", "csv"})
            CHECK(std::find(names.begin(), names.end(), std::string(expected)) != names.end());
    }

    TEST_CASE("every property suite passes at the pinned tolerances") {
        const auto results = verify::run_all(verify::Options{});
        REQUIRE(results.size() == verify::suite_names().size());
        for (const auto& r : results) {
            std::string detail = r.name;
            for (const auto& f : r.failures) detail += " | " + f;
            INFO(detail);
            CHECK(r.passed());
            CHECK(r.checks > 0);
        }
    }

    TEST_CASE("an unachievable tolerance cap is detected, not absorbed") {
        verify::Options opt;
        opt.tolerance_cap = 1e-30;
        const auto results = verify::run_all(opt);
        CHECK(std::any_of(results.begin(), results.end(),
                          [](const verify::SuiteResult& r) { return !r.passed(); }));
    }
}
