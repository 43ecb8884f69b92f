#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace efla::verify {

// tolerance_cap can only tighten the pinned per-check tolerances
// (checks run at min(pinned, cap)), so a loose cap never weakens a
// suite and an absurdly tight one (1e-30) is guaranteed to fail.
struct Options {
    double tolerance_cap = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0x5EF1A0ULL;
};

struct SuiteResult {
    std::string name;
    int checks = 0;
    std::vector<std::string> failures;
    bool passed() const { return failures.empty(); }
};

std::vector<std::string> suite_names();
std::vector<SuiteResult> run_all(const Options& opt);

}  // namespace efla::verify
