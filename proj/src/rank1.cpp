#include "efla/rank1.hpp"

#include <cmath>
#include <stdexcept>

#include "efla/kernels.hpp"

namespace efla {

double squared_norm(const Vec& k) {
    return active().sumsq(k.size(), k.data());
}

double gate_g(double x) {
    if (x < 0.0 || !std::isfinite(x)) throw std::invalid_argument("gate_g: x must be finite and >= 0");
    constexpr double tau = 1e-6;
    if (x < tau) {
        return 1.0 + x * (-0.5 + x * (1.0 / 6.0 - x / 24.0));
    }
    return -std::expm1(-x) / x;
}

DecayGate decay_gate(double beta, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("decay_gate: lambda < 0");
    if (beta < 0.0) throw std::invalid_argument("decay_gate: beta < 0");
    DecayGate g;
    g.lambda = lambda;
    g.beta = beta;
    g.alpha = beta * gate_g(beta * lambda);
    return g;
}

Mat apply_transition(const Vec& k, double alpha, const Mat& s) {
    if (s.rows() != k.size()) throw std::invalid_argument("apply_transition: rows(S) != len(k)");
    Mat out = s;
    std::vector<double> proj(s.cols());
    const Kernels& kn = active();
    kn.mat_tvec(out.rows(), out.cols(), out.data(), k.data(), proj.data());
    kn.rank1_update(out.rows(), out.cols(), -alpha, k.data(), proj.data(), out.data());
    return out;
}

Mat transition_matrix(const Vec& k, double alpha) {
    Mat m = Mat::identity(k.size());
    active().rank1_update(k.size(), k.size(), -alpha, k.data(), k.data(), m.data());
    return m;
}

double rank1_power_coefficient(const Vec& k, unsigned n) {
    if (n == 0) throw std::invalid_argument("rank1_power_coefficient: n == 0 (A^0 = I is not rank 1)");
    const double lambda = squared_norm(k);
    double c = 1.0;
    for (unsigned i = 1; i < n; ++i) c *= lambda;
    return c;
}

}  // namespace efla
