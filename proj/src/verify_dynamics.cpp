#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "efla/harness.hpp"
#include "efla/integrators.hpp"
#include "verify_internal.hpp"

namespace efla::verify {

namespace {

Vec scaled_unit(SplitMix64& rng, std::size_t d, double norm) {
    Vec k = random_unit_vec(rng, d);
    for (std::size_t i = 0; i < d; ++i) k[i] *= norm;
    return k;
}

}  // namespace

void suite_step_oracle(Ctx& ctx) {
    SplitMix64 rng = derive_stream(ctx.opt.seed, 105);

    Vec e1(4);
    e1[0] = 1.0;
    Vec v0 = random_vec(rng, 3);
    Mat wrote = step(Method::euler(), Mat(4, 3), {e1, v0, 1.0});
    ctx.check_le(max_abs_diff(wrote, outer(e1, v0)), ctx.tol(1e-15), "euler write into empty memory");

    Mat stored = outer(e1, v0);
    Mat fixed = step(Method::efla(), stored, {e1, v0, 1.7});
    ctx.check_le(max_abs_diff(fixed, stored), ctx.tol(1e-14) * (1.0 + max_abs(stored)),
                 "efla fixed point along unit key");

    // any S with S^T k = v is a fixed point of the whole family
    {
        Mat s = random_mat(rng, 8, 6);
        Vec k = scaled_unit(rng, 8, 1.4);
        Vec v = matvec_transposed(s, k);
        for (const Method& m : {Method::euler(), Method::rk2(), Method::rk4(), Method::rkn(6),
                                Method::efla()}) {
            Mat out = step(m, s, {k, v, 1.1});
            ctx.check_le(max_abs_diff(out, s), ctx.tol(1e-13) * (1.0 + max_abs(s)),
                         "fixed point under " + m.name());
        }
    }

    // scalar fast path against explicit matrix-power operators
    const std::vector<Method> grid_methods = {Method::euler(),  Method::rk2(), Method::rk4(),
                                              Method::rkn(1),   Method::rkn(2), Method::rkn(3),
                                              Method::rkn(4),   Method::efla()};
    double worst_collapse = 0.0;
    for (const Method& m : grid_methods) {
        for (double beta : {0.1, 1.0, 3.0}) {
            for (double lambda : {0.0, 0.5, 1.0, 4.0}) {
                Vec k = lambda == 0.0 ? Vec(8) : scaled_unit(rng, 8, std::sqrt(lambda));
                Vec v = random_vec(rng, 5, 0.5);
                Mat s = random_mat(rng, 8, 5, 0.5);
                StepInput in{k, v, beta};
                ExplicitOperators ops = explicit_operators(m, in);
                Mat oracle = add(matmul(ops.transition, s), ops.input_term);
                Mat fast = step(m, s, in);
                worst_collapse = std::max(worst_collapse, max_abs_diff(fast, oracle));
            }
        }
    }
    ctx.check_le(worst_collapse, ctx.tol(1e-10), "coefficient collapse vs matrix-power oracle");

    {
        Vec k = random_vec(rng, 5, 0.8);
        Vec v = random_vec(rng, 4);
        const double beta = 0.9;
        ExplicitOperators ops = explicit_operators(Method::rkn(1), {k, v, beta});
        Mat expect_t = sub(Mat::identity(5), scaled(outer(k, k), beta));
        Mat expect_b = scaled(outer(k, v), beta);
        ctx.check_le(max_abs_diff(ops.transition, expect_t), ctx.tol(1e-15), "rkn(1) transition I - beta A");
        ctx.check_le(max_abs_diff(ops.input_term, expect_b), ctx.tol(1e-15), "rkn(1) input beta k v^T");
    }
    {
        Vec e1b(3);
        e1b[0] = 1.0;
        ExplicitOperators ops = explicit_operators(Method::rk2(), {e1b, Vec(2), 1.0});
        ctx.check_near(ops.transition.at(0, 0), 0.5, ctx.tol(1e-15), "rk2 explicit eigenvalue at x=1");
        ctx.check_true(ops.transition.at(1, 1) == 1.0 && ops.transition.at(0, 1) == 0.0,
                       "rk2 explicit off-key identity");
    }
    {
        Vec k = random_vec(rng, 8, 0.7);
        Vec v = random_vec(rng, 8);
        Mat s = random_mat(rng, 8, 8);
        StepInput in{k, v, 1.3};
        ExplicitOperators ops = explicit_operators(Method::rkn(4), in);
        Mat oracle = add(matmul(ops.transition, s), ops.input_term);
        ctx.check_le(max_abs_diff(step(Method::rk4(), s, in), oracle), ctx.tol(1e-11),
                     "rkn(4) oracle matches rk4 step");
    }

    // delta-rule recovery at vanishing lambda
    double worst_delta = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        Vec k = scaled_unit(rng, 8, 1e-4);  // lambda = 1e-8
        Vec v = random_vec(rng, 6);
        Mat s = random_mat(rng, 8, 6);
        const double beta = rng.next_uniform(0.1, 2.0);
        Mat a = step(Method::efla(), s, {k, v, beta});
        Mat b = step(Method::euler(), s, {k, v, beta});
        worst_delta = std::max(worst_delta, max_abs_diff(a, b) / (1.0 + max_abs(s)));
    }
    ctx.check_le(worst_delta, ctx.tol(1e-12), "delta-rule recovery for lambda <= 1e-8");
}

void suite_reference_oracle(Ctx& ctx) {
    SplitMix64 rng = derive_stream(ctx.opt.seed, 106);

    {
        Vec k = scaled_unit(rng, 6, 1.0);
        Vec v = random_vec(rng, 5, 0.3);
        Mat s = random_mat(rng, 6, 5, 0.3);
        StepInput in{k, v, 0.9};
        Mat one = reference_step(s, in, 1);
        Mat rk4 = step(Method::rk4(), s, in);
        ctx.check_le(max_abs_diff(one, rk4), ctx.tol(1e-14), "one substep is one rk4 step");

        ctx.check_true(reference_step(s, {k, v, 0.0}, 64) == s, "beta = 0 leaves S unchanged");
    }

    // fourth-order substepping: error vs the closed form shrinks ~16x per
    // doubling of the substep count
    {
        Vec k = scaled_unit(rng, 6, std::sqrt(2.0));
        Vec v = random_vec(rng, 5);
        Mat s = random_mat(rng, 6, 5);
        StepInput in{k, v, 1.0};
        Mat exact = step(Method::efla(), s, in);
        double err[3];
        unsigned substeps = 100;
        for (int i = 0; i < 3; ++i, substeps *= 2)
            err[i] = max_abs_diff(reference_step(s, in, substeps), exact);
        for (int i = 0; i < 2; ++i) {
            const double ratio = err[i] / err[i + 1];
            ctx.check_true(ratio > 10.0 && ratio < 24.0,
                           "substep-doubling ratio " + std::to_string(i) + " = " + std::to_string(ratio));
        }
        ctx.check_le(err[2], ctx.tol(1e-10), "400-substep error scale");
    }

    {
        Vec k = scaled_unit(rng, 16, 1.6);
        Vec v = random_vec(rng, 16);
        Mat s = random_mat(rng, 16, 16);
        StepInput in{k, v, 1.2};  // beta*lambda ~ 3
        ctx.check_le(max_abs_diff(step(Method::efla(), s, in), reference_step(s, in, 100000)),
                     ctx.tol(1e-8), "closed form vs 1e5-substep integration");
    }
}

void suite_scan(Ctx& ctx) {
    SplitMix64 rng = derive_stream(ctx.opt.seed, 107);

    // single-token perfect recall
    {
        Vec k = random_unit_vec(rng, 5);
        Vec v = random_vec(rng, 4);
        SequenceBatch b;
        b.q = Mat(1, 5);
        b.k = Mat(1, 5);
        b.v = Mat(1, 4);
        b.beta = {1.0};
        std::copy_n(k.data(), 5, b.q.row(0).data());
        std::copy_n(k.data(), 5, b.k.row(0).data());
        std::copy_n(v.data(), 4, b.v.row(0).data());
        ScanResult r = recurrent_forward(Method::euler(), b);
        ctx.check_le(max_abs_diff(r.outputs.row(0), v.span()), ctx.tol(1e-14),
                     "L = 1 unit-key recall");
    }

    // vanilla with queries exactly orthogonal to every key
    {
        SequenceBatch b;
        const std::size_t l = 12, d = 8;
        b.q = Mat(l, d);
        b.k = Mat(l, d);
        b.v = Mat(l, 3);
        b.beta.assign(l, 1.0);
        for (std::size_t t = 0; t < l; ++t) {
            // keys live on axes 0..3, queries on axes 4..7
            b.k.at(t, t % 4) = rng.next_uniform(0.2, 2.0);
            b.q.at(t, 4 + t % 4) = rng.next_uniform(0.2, 2.0);
            for (std::size_t j = 0; j < 3; ++j) b.v.at(t, j) = rng.next_gaussian();
        }
        ScanResult r = recurrent_forward(Method::vanilla(), b);
        ctx.check_true(r.outputs == Mat(l, 3), "vanilla orthogonal queries read zero");
    }

    // replay oracle: explicit operators, fresh accumulators
    {
        SequenceBatch b = random_batch(rng, 256, 32, 32, 1.5, 1.5);
        ScanResult fast = recurrent_forward(Method::efla(), b);
        Mat s(32, 32);
        double worst = 0.0;
        for (std::size_t t = 0; t < b.length(); ++t) {
            Vec k(std::vector<double>(b.k.row(t).begin(), b.k.row(t).end()));
            Vec v(std::vector<double>(b.v.row(t).begin(), b.v.row(t).end()));
            ExplicitOperators ops = explicit_operators(Method::efla(), {k, v, b.beta[t]});
            s = add(matmul(ops.transition, s), ops.input_term);
            Vec o(32);
            matvec_transposed(s, b.q.row(t), o.span());
            worst = std::max(worst, max_abs_diff(o.span(), fast.outputs.row(t)));
        }
        ctx.check_le(worst, ctx.tol(1e-12), "scan outputs vs explicit-operator replay");
        ctx.check_le(max_abs_diff(s, fast.final_state), ctx.tol(1e-12), "final state vs replay");
        ctx.check_true(fast.divergence_index == -1, "no divergence on a contractive batch");
    }

    // causality: a truncated batch reproduces the prefix bitwise
    for (const Method& m : {Method::vanilla(), Method::euler(), Method::efla(), Method::rk2()}) {
        SequenceBatch b = random_batch(rng, 40, 6, 5, 1.2, 1.2);
        SequenceBatch head;
        const std::size_t cut = 17;
        head.q = Mat(cut, 6);
        head.k = Mat(cut, 6);
        head.v = Mat(cut, 5);
        head.beta.assign(b.beta.begin(), b.beta.begin() + cut);
        std::copy_n(b.q.data(), cut * 6, head.q.data());
        std::copy_n(b.k.data(), cut * 6, head.k.data());
        std::copy_n(b.v.data(), cut * 5, head.v.data());
        ScanResult full = recurrent_forward(m, b);
        ScanResult pre = recurrent_forward(m, head);
        bool same = true;
        for (std::size_t t = 0; t < cut && same; ++t)
            for (std::size_t j = 0; j < 5; ++j)
                if (full.outputs.at(t, j) != pre.outputs.at(t, j)) {
                    same = false;
                    break;
                }
        ctx.check_true(same, "causal prefix is bitwise stable under " + m.name());
    }

    // a zero-key token leaves memory untouched and reads the prior state
    {
        SequenceBatch b = random_batch(rng, 9, 6, 4, 1.0, 1.3);
        for (std::size_t j = 0; j < 6; ++j) b.k.at(4, j) = 0.0;
        for (const Method& m : {Method::vanilla(), Method::euler(), Method::efla()}) {
            ScanResult r = recurrent_forward(m, b);
            SequenceBatch head = b;
            head.q = Mat(4, 6);
            head.k = Mat(4, 6);
            head.v = Mat(4, 4);
            head.beta.assign(b.beta.begin(), b.beta.begin() + 4);
            std::copy_n(b.q.data(), 4 * 6, head.q.data());
            std::copy_n(b.k.data(), 4 * 6, head.k.data());
            std::copy_n(b.v.data(), 4 * 4, head.v.data());
            ScanResult before = recurrent_forward(m, head);
            Vec q4(std::vector<double>(b.q.row(4).begin(), b.q.row(4).end()));
            Vec expect = matvec_transposed(before.final_state, q4);
            ctx.check_true(max_abs_diff(r.outputs.row(4), expect.span()) == 0.0,
                           "zero-key token is a pure read under " + m.name());
        }
    }

    // state norm stays under the write-budget bound for the exact method
    {
        SequenceBatch b = random_batch(rng, 128, 8, 8, 2.0, 3.0);
        ScanResult r = recurrent_forward(Method::efla(), b);
        double budget = 0.0;
        bool bounded = true;
        for (std::size_t t = 0; t < b.length(); ++t) {
            const double lambda = dot(b.k.row(t), b.k.row(t));
            const double alpha = decay_gate(b.beta[t], lambda).alpha;
            budget += alpha * std::sqrt(lambda) * norm2(b.v.row(t));
            if (r.state_norm_trace[t] > budget + 1e-9) bounded = false;
        }
        ctx.check_true(bounded, "efla norm trace within cumulative write budget");
    }

    // divergence is recorded, not thrown
    {
        const std::size_t l = 1100, d = 4;
        SequenceBatch b;
        b.q = Mat(l, d);
        b.k = Mat(l, d);
        b.v = Mat(l, 3);
        b.beta.assign(l, 3.0);
        for (std::size_t t = 0; t < l; ++t) {
            b.k.at(t, 0) = 1.0;
            b.q.at(t, 0) = 1.0;
            b.v.at(t, 0) = 0.5;
        }
        ScanResult r = recurrent_forward(Method::euler(), b);
        ctx.check_true(r.divergence_index > 0, "euler at x = 3 eventually overflows");
        if (r.divergence_index > 0) {
            ctx.check_true(std::isfinite(r.state_norm_trace[r.divergence_index - 1]) &&
                               !std::isfinite(r.state_norm_trace[r.divergence_index]),
                           "divergence index marks the first non-finite norm");
        }
        ScanResult stable = recurrent_forward(Method::efla(), b);
        ctx.check_true(stable.divergence_index == -1, "efla never overflows on the same stream");
    }

    // key normalization
    {
        SequenceBatch b;
        b.q = Mat(2, 2, {1, 2, 0, 1});
        b.k = Mat(2, 2, {3, 4, 0, 0});
        b.v = Mat(2, 2, {1, 0, 0, 1});
        b.beta = {1.0, 1.0};
        NormalizeReport rep = normalize_keys(b);
        // scal multiplies by 1/n, so components land within an ulp of j/n
        ctx.check_near(rep.batch.k.at(0, 0), 0.6, ctx.tol(1e-15), "[3,4] normalizes to 0.6");
        ctx.check_near(rep.batch.k.at(0, 1), 0.8, ctx.tol(1e-15), "[3,4] normalizes to 0.8");
        ctx.check_true(rep.batch.k.at(1, 0) == 0.0 && rep.zero_vectors == 1,
                       "zero key left in place and tallied");
        ctx.check_true(rep.batch.q == b.q, "queries untouched without the flag");
        NormalizeReport repq = normalize_keys(b, true);
        ctx.check_near(dot(repq.batch.q.row(0), repq.batch.q.row(0)), 1.0, ctx.tol(1e-15),
                       "query normalized under the flag");
        SequenceBatch big = random_batch(rng, 50, 7, 3, 1.0, 2.5);
        NormalizeReport repb = normalize_keys(big);
        double worst = 0.0;
        for (std::size_t t = 0; t < big.length(); ++t)
            worst = std::max(worst, std::abs(dot(repb.batch.k.row(t), repb.batch.k.row(t)) - 1.0));
        ctx.check_le(worst, ctx.tol(1e-15), "normalized keys have unit squared norm");
    }
}

void suite_stability(Ctx& ctx) {
    const std::vector<Method> methods = {Method::vanilla(), Method::euler(), Method::rk2(),
                                         Method::rk4(), Method::rkn(6), Method::efla()};
    const std::vector<double> xs = {0.0, 0.25, 1.0, 2.0, 3.0};
    auto rows = stability_sweep(xs, 24, methods);
    double worst = 0.0;
    for (const StabilityRow& r : rows) worst = std::max(worst, r.abs_error);
    ctx.check_le(worst, ctx.tol(1e-12), "measured growth factors match analytic eigenvalues");

    auto find = [&](double x, const std::string& name) -> const StabilityRow& {
        for (const StabilityRow& r : rows)
            if (r.x == x && r.method == name) return r;
        static StabilityRow missing;
        return missing;
    };
    ctx.check_true(find(1.0, "euler").measured_factor == 0.0, "euler one-shot write at x = 1");
    ctx.check_near(find(2.0, "euler").measured_factor, 1.0, ctx.tol(1e-12), "euler marginal at x = 2");
    ctx.check_near(find(2.0, "efla").measured_factor, std::exp(-2.0), ctx.tol(1e-12), "efla at x = 2");
    ctx.check_near(find(3.0, "euler").measured_factor, 2.0, ctx.tol(1e-12), "euler factor 2 at x = 3");
    ctx.check_near(find(3.0, "rk2").measured_factor, 2.5, ctx.tol(1e-12), "rk2 factor 2.5 at x = 3");
    ctx.check_near(find(3.0, "rk4").measured_factor, 1.375, ctx.tol(1e-12), "rk4 factor 1.375 at x = 3");
    ctx.check_near(find(3.0, "efla").measured_factor, std::exp(-3.0), ctx.tol(1e-12),
                   "efla contracts by e^{-3}");
    ctx.check_true(find(3.0, "vanilla").measured_factor == 1.0, "vanilla never decays");
}

void suite_convergence(Ctx& ctx) {
    auto rows = rk_convergence(15, 1.0, 1.0);
    ctx.check_near(rows[0].error, std::exp(-1.0), ctx.tol(1e-12), "order-1 error e^{-1}");
    ctx.check_near(rows[1].error, std::abs(0.5 - (1.0 - std::exp(-1.0))), ctx.tol(1e-12),
                   "order-2 error 0.1321");
    ctx.check_near(rows[3].error, std::abs(0.625 - (1.0 - std::exp(-1.0))), ctx.tol(1e-12),
                   "order-4 error 0.00712");
    bool decreasing = true, bounded = true, ratios = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i && !(rows[i].error < rows[i - 1].error)) decreasing = false;
        if (!(rows[i].error <= rows[i].bound)) bounded = false;
        if (!(rows[i].ratio >= 0.0 && rows[i].ratio <= 1.0)) ratios = false;
    }
    ctx.check_true(decreasing, "errors strictly decreasing through order 15");
    ctx.check_true(bounded, "errors within the factorial tail bound");
    ctx.check_true(ratios, "error/bound ratios in [0, 1]");

    auto zero = rk_convergence(8, 0.0, 1.0);
    bool all_zero = true;
    for (const ConvergenceRow& r : zero)
        if (r.error != 0.0) all_zero = false;
    ctx.check_true(all_zero, "x = 0 reproduces the exact limit at every order");
}

}  // namespace efla::verify
