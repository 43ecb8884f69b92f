#pragma once

#include <limits>
#include <string>
#include <vector>

#include "efla/linalg.hpp"
#include "efla/rng.hpp"
#include "efla/scan.hpp"
#include "efla/verify.hpp"

namespace efla::verify {

struct Ctx {
    const Options& opt;
    int checks = 0;
    std::vector<std::string> failures;

    double tol(double pinned) const { return pinned < opt.tolerance_cap ? pinned : opt.tolerance_cap; }
    void check_true(bool ok, const std::string& what);
    void check_le(double value, double bound, const std::string& what);
    void check_near(double value, double expect, double tolerance, const std::string& what);
};

void suite_numerics(Ctx&);
void suite_gate(Ctx&);
void suite_transition(Ctx&);
void suite_series(Ctx&);
void suite_step_oracle(Ctx&);
void suite_reference_oracle(Ctx&);
void suite_scan(Ctx&);
void suite_chunkwise(Ctx&);
void suite_equivalence(Ctx&);
void suite_recall(Ctx&);
void suite_stability(Ctx&);
void suite_convergence(Ctx&);
void suite_kernel_lanes(Ctx&);
void suite_csv(Ctx&);

Vec random_vec(SplitMix64& rng, std::size_t n, double scale = 1.0);
Vec random_unit_vec(SplitMix64& rng, std::size_t n);
Mat random_mat(SplitMix64& rng, std::size_t rows, std::size_t cols, double scale = 1.0);
// beta ~ U[0, beta_max]; key directions isotropic with norms U[0, knorm_max];
// unit queries; value entries N(0,1)/sqrt(d_v). Pairs with
// beta*|k|^2 > x_cap are redrawn: comparing two summation orders at an
// absolute tolerance needs the per-token amplification of every method
// kept out of the explosive regime, while the marginal ranges of beta
// and |k| stay fully covered.
SequenceBatch random_batch(SplitMix64& rng, std::size_t len, std::size_t d_k, std::size_t d_v,
                           double beta_max, double knorm_max,
                           double x_cap = std::numeric_limits<double>::infinity());

}  // namespace efla::verify
