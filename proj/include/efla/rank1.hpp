#pragma once

#include <cstddef>

#include "efla/linalg.hpp"

namespace efla {

// One token of the recurrence dS/dt = -k k^T S + k v^T integrated over a
// unit of "time" beta.
struct StepInput {
    Vec k;
    Vec v;
    double beta = 1.0;
};

struct DecayGate {
    double lambda = 0.0;  // ||k||^2
    double beta = 0.0;
    double alpha = 0.0;   // (1 - exp(-beta*lambda)) / lambda
};

double squared_norm(const Vec& k);

// g(x) = (1 - e^-x)/x = -expm1(-x)/x, continuously extended with g(0)=1.
// Below tau = 1e-6 the direct quotient loses relative accuracy, so a
// 4-term alternating series 1 - x/2 + x^2/6 - x^3/24 is used there; its
// truncation error at tau is ~ tau^4/120 ~ 8e-27, far under double eps.
double gate_g(double x);

// alpha = beta * g(beta * lambda). Throws on negative beta or lambda.
// lambda == 0 returns alpha = beta exactly (the ODE degenerates to
// dS/dt = 0, and the update must reduce to the delta rule's writing
// strength).
DecayGate decay_gate(double beta, double lambda);

// (I - alpha k k^T) S, computed as S - alpha k (S^T k)^T without forming
// the d_k x d_k operator.
Mat apply_transition(const Vec& k, double alpha, const Mat& s);

// Dense I - alpha k k^T, for the oracle path only.
Mat transition_matrix(const Vec& k, double alpha);

// Coefficient of A in A^n for A = k k^T with ||k||^2 = lambda:
// A^n = lambda^(n-1) A for n >= 1. Throws for n == 0.
double rank1_power_coefficient(const Vec& k, unsigned n);

}  // namespace efla
