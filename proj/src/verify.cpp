#include "efla/verify.hpp"

#include <cmath>
#include <cstdio>

#include "verify_internal.hpp"

namespace efla::verify {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

struct SuiteEntry {
    const char* name;
    void (*fn)(Ctx&);
};

const SuiteEntry kSuites[] = {
    {"numerics", suite_numerics},
    {"gate", suite_gate},
    {"transition", suite_transition},
    {"series", suite_series},
    {"step-oracle", suite_step_oracle},
    {"reference-oracle", suite_reference_oracle},
    {"scan", suite_scan},
    {"chunkwise", suite_chunkwise},
    {"equivalence", suite_equivalence},
    {"recall", suite_recall},
    {"stability", suite_stability},
    {"convergence", suite_convergence},
    {"kernel-lanes", suite_kernel_lanes},
    {"csv", suite_csv},
};

}  // namespace

void Ctx::check_true(bool ok, const std::string& what) {
    ++checks;
    if (!ok) failures.push_back(what);
}

void Ctx::check_le(double value, double bound, const std::string& what) {
    ++checks;
    if (!(value <= bound)) {
        failures.push_back(what + ": " + fmt(value) + " > " + fmt(bound));
    }
}

void Ctx::check_near(double value, double expect, double tolerance, const std::string& what) {
    ++checks;
    if (!(std::abs(value - expect) <= tolerance)) {
        failures.push_back(what + ": got " + fmt(value) + ", want " + fmt(expect) + " +/- " +
                           fmt(tolerance));
    }
}

std::vector<std::string> suite_names() {
    std::vector<std::string> names;
    for (const auto& s : kSuites) names.emplace_back(s.name);
    return names;
}

std::vector<SuiteResult> run_all(const Options& opt) {
    std::vector<SuiteResult> results;
    for (const auto& s : kSuites) {
        Ctx ctx{opt, 0, {}};
        try {
            s.fn(ctx);
        } catch (const std::exception& e) {
            ctx.failures.push_back(std::string("unhandled exception: ") + e.what());
        }
        results.push_back({s.name, ctx.checks, std::move(ctx.failures)});
    }
    return results;
}

Vec random_vec(SplitMix64& rng, std::size_t n, double scale) {
    std::vector<double> x(n);
    for (auto& e : x) e = scale * rng.next_gaussian();
    return Vec(std::move(x));
}

Vec random_unit_vec(SplitMix64& rng, std::size_t n) {
    for (;;) {
        Vec v = random_vec(rng, n);
        double norm = norm2(v.span());
        if (norm > 1e-6) {
            for (std::size_t i = 0; i < n; ++i) v[i] /= norm;
            return v;
        }
    }
}

Mat random_mat(SplitMix64& rng, std::size_t rows, std::size_t cols, double scale) {
    Mat m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.next_gaussian();
    return m;
}

SequenceBatch random_batch(SplitMix64& rng, std::size_t len, std::size_t d_k, std::size_t d_v,
                           double beta_max, double knorm_max, double x_cap) {
    SequenceBatch batch;
    batch.q = Mat(len, d_k);
    batch.k = Mat(len, d_k);
    batch.v = Mat(len, d_v);
    batch.beta.resize(len);
    const double vscale = 1.0 / std::sqrt(static_cast<double>(d_v));
    for (std::size_t t = 0; t < len; ++t) {
        Vec q = random_unit_vec(rng, d_k);
        Vec kdir = random_unit_vec(rng, d_k);
        double knorm = 0.0, beta = 0.0;
        do {
            knorm = rng.next_uniform(0.0, knorm_max);
            beta = rng.next_uniform(0.0, beta_max);
        } while (beta * knorm * knorm > x_cap);
        for (std::size_t j = 0; j < d_k; ++j) {
            batch.q.at(t, j) = q[j];
            batch.k.at(t, j) = knorm * kdir[j];
        }
        for (std::size_t j = 0; j < d_v; ++j) batch.v.at(t, j) = vscale * rng.next_gaussian();
        batch.beta[t] = beta;
    }
    batch.validate();
    return batch;
}

}  // namespace efla::verify
