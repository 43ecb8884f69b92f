#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "efla/integrators.hpp"
#include "efla/linalg.hpp"
#include "efla/rank1.hpp"
#include "verify_internal.hpp"

namespace efla::verify {

void suite_numerics(Ctx& ctx) {
    SplitMix64 rng = derive_stream(ctx.opt.seed, 101);

    ctx.check_true(dot(Vec{1, 0}, Vec{0, 1}) == 0.0, "dot orthogonal");
    ctx.check_true(dot(Vec{1, 2}, Vec{3, 4}) == 11.0, "dot [1,2].[3,4]");
    ctx.check_near(dot(Vec{0.6, 0.8}, Vec{0.6, 0.8}), 1.0, ctx.tol(1e-15), "dot unit key");

    Mat ob = outer(Vec{1, 0}, Vec{2, 3});
    ctx.check_true(ob == Mat(2, 2, {2, 3, 0, 0}), "outer e1 x [2,3]");
    ctx.check_true(outer(Vec{0, 0}, Vec{5, 7}) == Mat(2, 2), "outer zero row");
    Mat kk = outer(Vec{1, 1}, Vec{1, 1});
    ctx.check_near(kk.at(0, 0) + kk.at(1, 1), 2.0, ctx.tol(1e-15), "outer(k,k) trace = lambda");

    // rank <= 1: every 2x2 minor vanishes
    Vec a = random_vec(rng, 9), b = random_vec(rng, 7);
    Mat o = outer(a, b);
    double worst_minor = 0.0;
    for (std::size_t i = 0; i < o.rows(); ++i)
        for (std::size_t j = i + 1; j < o.rows(); ++j)
            for (std::size_t p = 0; p < o.cols(); ++p)
                for (std::size_t q = p + 1; q < o.cols(); ++q) {
                    double minor = o.at(i, p) * o.at(j, q) - o.at(i, q) * o.at(j, p);
                    worst_minor = std::max(worst_minor, std::abs(minor));
                }
    ctx.check_le(worst_minor, ctx.tol(1e-12), "outer 2x2 minors");

    Vec q = random_vec(rng, 6);
    ctx.check_true(matvec_transposed(Mat::identity(6), q) == q, "S^T q with S = I");
    ctx.check_true(matvec_transposed(Mat(6, 4), q) == Vec(4), "S^T q with S = 0");
    Vec unitk = random_unit_vec(rng, 8);
    Vec val = random_vec(rng, 5);
    Vec back = matvec_transposed(outer(unitk, val), unitk);
    ctx.check_le(max_abs_diff(back.span(), val.span()), ctx.tol(1e-14),
                 "stored pair readout along unit key");

    Mat rhs = random_mat(rng, 2, 2);
    ctx.check_true(unit_lower_solve(Mat::identity(2), rhs) == rhs, "solve with L = I");
    const double av = 1.75;
    Mat l2(2, 2, {1, 0, av, 1});
    Mat x2 = unit_lower_solve(l2, Mat::identity(2));
    ctx.check_true(x2 == Mat(2, 2, {1, 0, -av, 1}), "2x2 unit-lower inverse");

    for (std::size_t n : {std::size_t{8}, std::size_t{64}}) {
        Mat lmat = Mat::identity(n);
        const double scale = 1.0 / std::sqrt(static_cast<double>(n));
        for (std::size_t i = 1; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) lmat.at(i, j) = scale * rng.next_gaussian();
        Mat bmat = random_mat(rng, n, 5);
        Mat x = unit_lower_solve(lmat, bmat);
        double resid = max_abs_diff(matmul(lmat, x), bmat);
        ctx.check_le(resid, ctx.tol(n == 8 ? 1e-12 : 1e-10),
                     "unit_lower_solve residual " + std::to_string(n) + "x" + std::to_string(n));
    }
}

void suite_gate(Ctx& ctx) {
    ctx.check_near(decay_gate(std::log(2.0), 1.0).alpha, 0.5, ctx.tol(1e-15), "alpha(ln 2, 1)");
    ctx.check_true(decay_gate(0.1, 0.0).alpha == 0.1, "alpha(0.1, 0) = beta exactly");
    ctx.check_near(decay_gate(1.0, 1.0).alpha, 1.0 - std::exp(-1.0), ctx.tol(1e-15), "alpha(1, 1)");
    ctx.check_true(decay_gate(0.0, 3.0).alpha == 0.0, "alpha(0, lambda) = 0");

    double worst_alpha_lambda = 0.0;
    bool bounds_ok = true;
    for (int i = 1; i <= 20; ++i) {
        for (int j = 1; j <= 20; ++j) {
            const double beta = 0.2 * i;   // (0, 4]
            const double lambda = 0.45 * j;
            DecayGate g = decay_gate(beta, lambda);
            if (!(g.alpha > 0.0 && g.alpha < beta)) bounds_ok = false;
            const double al = g.alpha * lambda;
            if (!(al >= 0.0 && al < 1.0)) bounds_ok = false;
            worst_alpha_lambda =
                std::max(worst_alpha_lambda, std::abs(al - (1.0 - std::exp(-beta * lambda))));
        }
    }
    ctx.check_true(bounds_ok, "0 < alpha < beta and alpha*lambda in [0,1) on grid");
    ctx.check_le(worst_alpha_lambda, ctx.tol(1e-15), "alpha*lambda = 1 - e^{-beta*lambda}");

    // alpha increases toward beta as lambda decreases
    const double beta = 1.3;
    double prev = decay_gate(beta, 8.0).alpha;
    bool monotone = true;
    for (double lambda = 4.0; lambda > 1e-12; lambda *= 0.5) {
        double cur = decay_gate(beta, lambda).alpha;
        if (!(cur > prev && cur < beta)) monotone = false;
        prev = cur;
    }
    ctx.check_true(monotone, "alpha -> beta monotonically as lambda -> 0");
    ctx.check_le(beta - decay_gate(beta, 1e-14).alpha, ctx.tol(1e-13), "alpha limit at tiny lambda");

    const double tau = 1e-6;
    double jump = std::abs(gate_g(tau * (1.0 + 1e-12)) - gate_g(tau * (1.0 - 1e-12)));
    ctx.check_le(jump, ctx.tol(1e-12), "series/expm1 branch continuity at tau");
    ctx.check_true(gate_g(0.0) == 1.0, "g(0) = 1");
}

void suite_transition(Ctx& ctx) {
    SplitMix64 rng = derive_stream(ctx.opt.seed, 103);

    Vec e1(4);
    e1[0] = 1.0;
    const double alpha1 = 1.0 - std::exp(-1.0);
    Mat decayed = apply_transition(e1, alpha1, Mat::identity(4));
    ctx.check_near(decayed.at(0, 0), std::exp(-1.0), ctx.tol(1e-15), "e1 eigenvalue e^{-1}");
    ctx.check_true(decayed.at(1, 1) == 1.0 && decayed.at(2, 3) == 0.0, "off-key rows untouched");

    Mat s0 = random_mat(rng, 5, 3);
    ctx.check_true(apply_transition(Vec(5), 0.7, s0) == s0, "zero key is identity transition");

    ctx.check_true(transition_matrix(Vec(3), 0.9) == Mat::identity(3), "transition_matrix(0) = I");
    Mat half = transition_matrix(e1, 0.5);
    ctx.check_true(half.at(0, 0) == 0.5 && half.at(1, 1) == 1.0 && half.at(0, 1) == 0.0,
                   "transition_matrix(e1, 1/2)");

    // spectral action: k is an eigenvector with eigenvalue 1 - alpha*lambda,
    // anything orthogonal to k has eigenvalue 1. Key norms stay <= 1.8 so
    // e^{-beta*lambda} >= 3e-4 and the relative comparison is not drowned
    // by the rounding floor of 1 - alpha*lambda.
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = 3 + rng.next_u64() % 30;  // up to 32
        Vec k = random_unit_vec(rng, d);
        const double knorm = rng.next_uniform(0.3, 1.8);
        for (std::size_t i = 0; i < d; ++i) k[i] *= knorm;
        const double lambda = squared_norm(k);
        const double beta = rng.next_uniform(0.05, 2.5);
        const double alpha = decay_gate(beta, lambda).alpha;
        Mat s = random_mat(rng, d, 6);

        Mat fast = apply_transition(k, alpha, s);
        Mat oracle = matmul(transition_matrix(k, alpha), s);
        ctx.check_le(max_abs_diff(fast, oracle), ctx.tol(1e-12), "apply == explicit product");

        Vec before = matvec_transposed(s, k);
        Vec after = matvec_transposed(fast, k);
        const double expected = std::exp(-beta * lambda) * norm2(before.span());
        const double rel = std::abs(norm2(after.span()) - expected) / (expected + 1e-300);
        ctx.check_le(rel, ctx.tol(1e-10), "key-aligned component scaled by e^{-beta*lambda}");

        Vec w = random_vec(rng, d);
        const double proj = dot(w, k) / lambda;
        for (std::size_t i = 0; i < d; ++i) w[i] -= proj * k[i];
        Vec wa = matvec_transposed(fast, w);
        Vec wb = matvec_transposed(s, w);
        ctx.check_le(max_abs_diff(wa.span(), wb.span()), ctx.tol(1e-12),
                     "orthogonal component unchanged");
    }

    Vec anyk = random_vec(rng, 6);
    ctx.check_true(rank1_power_coefficient(anyk, 1) == 1.0, "A^1 coefficient");
    ctx.check_true(rank1_power_coefficient(Vec{1, 1}, 3) == 4.0, "lambda=2, n=3 -> 4");
    Vec k4 = random_vec(rng, 8, 0.6);
    Mat amat = outer(k4, k4);
    Mat apow = matmul(matmul(amat, amat), matmul(amat, amat));
    Mat shortcut = scaled(amat, rank1_power_coefficient(k4, 4));
    ctx.check_le(max_abs_diff(apow, shortcut), ctx.tol(1e-10), "A^4 = lambda^3 A");
}

void suite_series(Ctx& ctx) {
    auto [p10, p11] = series_phi(1, 1.0);
    ctx.check_true(p10 == 0.0 && p11 == 1.0, "phi(1, 1) = (0, 1)");
    auto [p40, p41] = series_phi(4, 1.0);
    ctx.check_near(p40, 0.375, ctx.tol(1e-15), "phi0(4, 1)");
    ctx.check_near(p41, 0.625, ctx.tol(1e-15), "phi1(4, 1)");
    ctx.check_near(series_phi(40, 1.0).first, std::exp(-1.0), ctx.tol(1e-15), "phi0(40, 1) -> e^{-1}");

    bool identity_ok = true;
    for (unsigned n : {1u, 2u, 3u, 4u, 7u, 12u})
        for (double x : {0.0, 0.3, 1.0, 2.7}) {
            auto [f0, f1] = series_phi(n, x);
            if (std::abs(f0 - (1.0 - x * f1)) > ctx.tol(1e-14) * (1.0 + std::abs(f0)))
                identity_ok = false;
        }
    ctx.check_true(identity_ok, "phi0 = 1 - x*phi1");

    auto c_rk2 = coefficients(Method::rk2(), 1.0, 1.0);
    ctx.check_near(c_rk2.c_transition, 0.5, ctx.tol(1e-15), "rk2 coefficient at x=1");
    auto c_rk4 = coefficients(Method::rk4(), 1.0, 1.0);
    ctx.check_near(c_rk4.c_transition, 0.625, ctx.tol(1e-15), "rk4 coefficient at x=1");
    auto c_efla = coefficients(Method::efla(), 1.0, 1.0);
    ctx.check_near(c_efla.c_transition, 1.0 - std::exp(-1.0), ctx.tol(1e-15), "efla coefficient at x=1");
    auto c_van = coefficients(Method::vanilla(), 2.0, 3.0);
    ctx.check_true(c_van.c_transition == 0.0 && c_van.c_input == 1.0, "vanilla (0, 1)");

    bool equal_pair = true;
    bool lambda0_beta = true;
    const std::vector<Method> family = {Method::euler(), Method::rk2(), Method::rk4(),
                                        Method::rkn(6), Method::efla()};
    for (const Method& m : family) {
        for (double beta : {0.1, 1.0, 3.0}) {
            for (double lambda : {0.0, 0.5, 1.0, 4.0}) {
                auto c = coefficients(m, beta, lambda);
                if (c.c_transition != c.c_input) equal_pair = false;
                if (lambda == 0.0 && c.c_transition != beta) lambda0_beta = false;
            }
        }
    }
    ctx.check_true(equal_pair, "ODE family: c_transition == c_input");
    ctx.check_true(lambda0_beta, "ODE family at lambda = 0: (beta, beta)");

    double worst_named = 0.0;
    for (double beta : {0.1, 1.0, 3.0})
        for (double lambda : {0.0, 0.5, 1.0, 4.0}) {
            worst_named = std::max(worst_named,
                                   std::abs(coefficients(Method::rk2(), beta, lambda).c_transition -
                                            coefficients(Method::rkn(2), beta, lambda).c_transition));
            worst_named = std::max(worst_named,
                                   std::abs(coefficients(Method::rk4(), beta, lambda).c_transition -
                                            coefficients(Method::rkn(4), beta, lambda).c_transition));
        }
    ctx.check_le(worst_named, ctx.tol(1e-14), "rk2/rk4 agree with rkn(2)/rkn(4)");

    const double exact = 1.0 - std::exp(-1.0);
    double prev = std::numeric_limits<double>::infinity();
    bool decreasing = true, bounded = true;
    double factorial = 1.0;  // (N+1)!
    for (unsigned n = 1; n <= 15; ++n) {
        factorial *= n + 1;
        const double err = std::abs(series_phi(n, 1.0).second - exact);
        if (!(err < prev)) decreasing = false;
        if (!(err <= std::exp(1.0) / factorial)) bounded = false;
        prev = err;
    }
    ctx.check_true(decreasing, "one-step error strictly decreasing through N = 15");
    ctx.check_true(bounded, "one-step error within e/(N+1)!");
}

}  // namespace efla::verify
