#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "efla/linalg.hpp"
#include "efla/rank1.hpp"

namespace efla {

enum class MethodKind { VanillaLinear, DeltaEuler, RK2, RK4, RKN, ExactEFLA, Reference };

struct Method {
    MethodKind kind = MethodKind::ExactEFLA;
    unsigned order = 0;     // RK truncation depth (RKN; also set for euler/rk2/rk4)
    unsigned substeps = 0;  // Reference only

    static Method vanilla() { return {MethodKind::VanillaLinear, 0, 0}; }
    static Method euler() { return {MethodKind::DeltaEuler, 1, 0}; }
    static Method rk2() { return {MethodKind::RK2, 2, 0}; }
    static Method rk4() { return {MethodKind::RK4, 4, 0}; }
    static Method rkn(unsigned order);
    static Method efla() { return {MethodKind::ExactEFLA, 0, 0}; }
    static Method reference(unsigned substeps);

    // Methods with a per-token scalar rate c: euler, rk*, efla.
    bool is_ode_family() const;
    std::string name() const;
    // Accepts vanilla | euler | rk<N> | efla | reference[:substeps].
    static Method parse(std::string_view text);
};

struct StepCoefficients {
    double c_transition = 0.0;  // coefficient on k (k^T S)
    double c_input = 0.0;       // coefficient on k v^T
};

// Truncations of the exponential series at x >= 0:
//   phi0 = sum_{n=0}^{N} (-x)^n/n!      (transition eigenvalue along k)
//   phi1 = sum_{n=0}^{N-1} (-x)^n/(n+1)! (effective-rate factor, c = beta*phi1)
// Both evaluated by Horner from the highest term down.
std::pair<double, double> series_phi(unsigned order, double x);

// Per-token scalar coefficients; throws for Reference (it has no
// single-step collapse) and for negative beta/lambda.
StepCoefficients coefficients(const Method& m, double beta, double lambda);

// S' = S - c_transition k (k^T S) + c_input k v^T in O(d_k d_v); the
// Reference method delegates to reference_step.
Mat step(const Method& m, const Mat& s, const StepInput& in);
void step_inplace(const Method& m, Mat& s, const StepInput& in, Vec& scratch);
// Non-allocating core used by the scan loops. scratch size = cols(S).
void step_core(const Method& m, Mat& s, std::span<const double> k, std::span<const double> v,
               double beta, Vec& scratch);

// Integrates dS/dt = -k k^T S + k v^T over duration beta with classical
// 4-stage RK and step h = beta/substeps, holding k, v fixed (ZOH). The
// stages act on full matrices -- no rank-1 coefficient shortcut -- so
// this is an independent oracle for the closed-form update.
Mat reference_step(const Mat& s, const StepInput& in, unsigned substeps);
Mat reference_step(const Mat& s, std::span<const double> k, std::span<const double> v, double beta,
                   unsigned substeps);

// Dense operators built from explicit matrix powers of A = k k^T (no
// lambda shortcut): S' = transition * S + input_term. Test oracle for
// the scalar collapse; throws for vanilla and reference.
struct ExplicitOperators {
    Mat transition;  // d_k x d_k
    Mat input_term;  // d_k x d_v
};
ExplicitOperators explicit_operators(const Method& m, const StepInput& in);

}  // namespace efla
