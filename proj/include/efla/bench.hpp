#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "efla/chunkwise.hpp"
#include "efla/integrators.hpp"

namespace efla {

struct BenchRow {
    std::string path;  // "recurrent" or "chunkwise"
    std::size_t len = 0;
    double median_seconds = 0.0;
    double tokens_per_second = 0.0;
};

struct BenchReport {
    std::vector<BenchRow> rows;
    double exponent_recurrent = 0.0;
    double exponent_chunkwise = 0.0;
    // Max |difference| between the two paths' outputs and final state on
    // the smallest grid entry; a wrong mask or chunk boundary shows up
    // here before it shows up in timings.
    double sanity_max_deviation = 0.0;
};

// Unit keys and queries, beta in [0,1]: contractive dynamics, so timing
// is not distorted by overflow handling at any grid size.
SequenceBatch make_bench_batch(std::uint64_t seed, std::size_t len, std::size_t d_k, std::size_t d_v);

// Least-squares slope of log(seconds) against log(L).
double fit_loglog_exponent(const std::vector<std::pair<double, double>>& len_seconds);

BenchReport run_scaling_bench(const Method& method, const std::vector<std::size_t>& l_grid,
                              std::size_t d_k, std::size_t d_v, std::size_t chunk_size,
                              unsigned reps, std::uint64_t seed);

std::string to_csv(const std::vector<BenchRow>& rows);

}  // namespace efla
