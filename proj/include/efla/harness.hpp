#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "efla/integrators.hpp"
#include "efla/rng.hpp"
#include "efla/scan.hpp"

namespace efla {

enum class KeyScheme { Orthonormal, GaussianNormalized, GaussianRaw };
std::string scheme_name(KeyScheme s);
KeyScheme parse_scheme(std::string_view text);

// Store phase writes n_pairs (k_i, v_i) with beta = 1 and q = 0; the
// query phase re-presents each k_i as q with k = 0 and v = 0, so reads
// never mutate memory. targets row i is v_i.
struct RecallTask {
    std::size_t n_pairs = 0;
    std::size_t store_len = 0;
    KeyScheme scheme = KeyScheme::Orthonormal;
    std::string scheme_label;
    SequenceBatch batch;
    Mat targets;
};

struct PerturbationSpec {
    enum class Kind { None, Dropout, Scale, Gaussian };
    Kind kind = Kind::None;
    double param = 0.0;
    // Intensity scaling stresses lambda = ||k||^2, so only keys are
    // scaled by default; flip this to also scale values.
    bool scale_values = false;

    static PerturbationSpec none() { return {}; }
    static PerturbationSpec dropout(double p);
    static PerturbationSpec scale(double s, bool scale_values = false);
    static PerturbationSpec gaussian(double sigma);
    std::string name() const;
};

struct TrialReport {
    std::uint64_t seed = 0;
    std::string method, scheme, perturbation;
    double param = 0.0;
    double mse = 0.0;
    double cosine = 0.0;
    double max_state_norm = 0.0;
    long long divergence_index = -1;
};

RecallTask gen_recall(std::uint64_t seed, std::size_t n_pairs, std::size_t d_k, std::size_t d_v,
                      KeyScheme scheme);
// Same-key stress task: one (k, v) pair written n_repeats times, then a
// single query. Divergence of explicit integrators shows up as a finite
// divergence index once the accumulated growth overflows.
RecallTask gen_repeated_recall(std::uint64_t seed, std::size_t n_repeats, std::size_t d_k,
                               std::size_t d_v);

// Dropout and Gaussian touch store-phase tokens only (query tokens carry
// zero keys/values by construction and must stay pure reads); Scale
// multiplies every key row.
SequenceBatch perturb(const SequenceBatch& batch, const PerturbationSpec& p, std::uint64_t seed,
                      std::size_t store_len);

TrialReport eval_recall(const Method& method, const RecallTask& task, const PerturbationSpec& p,
                        std::uint64_t seed);

struct StabilityRow {
    double x = 0.0;
    std::string method;
    double measured_factor = 0.0;
    double predicted_factor = 0.0;
    double abs_error = 0.0;
};
// Repeated same-key pure-transition updates (v = 0); the measured
// per-step growth factor along k is compared with the analytic
// eigenvalue: |1-x| (euler), |phi0_N(x)| (rk), e^-x (efla, reference),
// 1 (vanilla).
std::vector<StabilityRow> stability_sweep(const std::vector<double>& x_values, unsigned steps,
                                          const std::vector<Method>& methods);

struct ConvergenceRow {
    unsigned order = 0;
    double x = 0.0;
    double error = 0.0;  // |beta*phi1_N(x) - alpha|
    double bound = 0.0;  // e^x x^N beta / (N+1)!
    double ratio = 0.0;
};
std::vector<ConvergenceRow> rk_convergence(unsigned max_order, double beta, double lambda);

// CSV serialization: header + one row per record, floats with 17
// significant digits so re-parsing is lossless.
std::string to_csv(const std::vector<TrialReport>& rows);
std::string to_csv(const std::vector<StabilityRow>& rows);
std::string to_csv(const std::vector<ConvergenceRow>& rows);
void write_file(const std::string& path, const std::string& contents);
std::string format_double(double v);

}  // namespace efla
