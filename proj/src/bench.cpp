#include "efla/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "efla/harness.hpp"
#include "efla/kernels.hpp"
#include "efla/rng.hpp"

namespace efla {

SequenceBatch make_bench_batch(std::uint64_t seed, std::size_t len, std::size_t d_k,
                               std::size_t d_v) {
    SplitMix64 rng = derive_stream(seed, 3);
    const Kernels& kn = active();
    SequenceBatch b;
    b.q = Mat(len, d_k);
    b.k = Mat(len, d_k);
    b.v = Mat(len, d_v);
    b.beta.resize(len);
    auto fill_unit = [&](std::span<double> row) {
        double norm = 0.0;
        do {
            for (double& x : row) x = rng.next_gaussian();
            norm = std::sqrt(kn.sumsq(row.size(), row.data()));
        } while (norm == 0.0);
        kn.scal(row.size(), 1.0 / norm, row.data());
    };
    for (std::size_t t = 0; t < len; ++t) {
        fill_unit(b.k.row(t));
        fill_unit(b.q.row(t));
        for (double& x : b.v.row(t)) x = rng.next_gaussian();
        b.beta[t] = rng.next_double();
    }
    return b;
}

double fit_loglog_exponent(const std::vector<std::pair<double, double>>& len_seconds) {
    if (len_seconds.size() < 2)
        throw std::invalid_argument("fit_loglog_exponent: need at least two points");
    double mx = 0.0, my = 0.0;
    for (const auto& [l, s] : len_seconds) {
        mx += std::log(l);
        my += std::log(s);
    }
    mx /= len_seconds.size();
    my /= len_seconds.size();
    double num = 0.0, den = 0.0;
    for (const auto& [l, s] : len_seconds) {
        const double dx = std::log(l) - mx;
        num += dx * (std::log(s) - my);
        den += dx * dx;
    }
    return num / den;
}

namespace {

template <typename F>
double median_seconds(unsigned reps, F&& run) {
    using clock = std::chrono::steady_clock;
    run();  // warmup
    std::vector<double> times(reps);
    for (unsigned r = 0; r < reps; ++r) {
        const auto t0 = clock::now();
        run();
        times[r] = std::chrono::duration<double>(clock::now() - t0).count();
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

}  // namespace

BenchReport run_scaling_bench(const Method& method, const std::vector<std::size_t>& l_grid,
                              std::size_t d_k, std::size_t d_v, std::size_t chunk_size,
                              unsigned reps, std::uint64_t seed) {
    if (l_grid.empty()) throw std::invalid_argument("run_scaling_bench: empty length grid");
    if (reps < 5) reps = 5;
    BenchReport report;
    std::vector<std::pair<double, double>> rec_pts, chk_pts;
    const ChunkPlan plan{chunk_size};
    bool first = true;
    for (std::size_t len : l_grid) {
        const SequenceBatch batch = make_bench_batch(seed, len, d_k, d_v);
        if (first) {
            const ScanResult a = recurrent_forward(method, batch);
            const ScanResult b = chunk_forward(method, batch, plan);
            report.sanity_max_deviation = std::max(max_abs_diff(a.outputs, b.outputs),
                                                   max_abs_diff(a.final_state, b.final_state));
            first = false;
        }
        const double rec_s = median_seconds(reps, [&] { (void)recurrent_forward(method, batch); });
        const double chk_s = median_seconds(reps, [&] { (void)chunk_forward(method, batch, plan); });
        rec_pts.emplace_back(static_cast<double>(len), rec_s);
        chk_pts.emplace_back(static_cast<double>(len), chk_s);
        report.rows.push_back({"recurrent", len, rec_s, len / rec_s});
        report.rows.push_back({"chunkwise", len, chk_s, len / chk_s});
    }
    if (l_grid.size() >= 2) {
        report.exponent_recurrent = fit_loglog_exponent(rec_pts);
        report.exponent_chunkwise = fit_loglog_exponent(chk_pts);
    }
    return report;
}

std::string to_csv(const std::vector<BenchRow>& rows) {
    std::string s = "path,L,median_seconds,tokens_per_second\n";
    for (const BenchRow& r : rows) {
        s += r.path;
        s += ',';
        s += std::to_string(r.len);
        s += ',';
        s += format_double(r.median_seconds);
        s += ',';
        s += format_double(r.tokens_per_second);
        s += '\n';
    }
    return s;
}

}  // namespace efla
