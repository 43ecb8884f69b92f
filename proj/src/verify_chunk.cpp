#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "efla/chunkwise.hpp"
#include "efla/kernels.hpp"
#include "verify_internal.hpp"

namespace efla::verify {

namespace {

Mat rows_with_norm(SplitMix64& rng, std::size_t rows, std::size_t cols, double max_norm) {
    Mat m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        Vec dir = random_unit_vec(rng, cols);
        const double norm = rng.next_uniform(0.0, max_norm);
        for (std::size_t j = 0; j < cols; ++j) m.at(r, j) = norm * dir[j];
    }
    return m;
}

}  // namespace

void suite_chunkwise(Ctx& ctx) {
    SplitMix64 rng = derive_stream(ctx.opt.seed, 109);

    {
        Mat k1 = random_mat(rng, 1, 4);
        Mat v1 = random_mat(rng, 1, 3);
        const double a1 = 0.8;
        auto [w, u] = wy_sequential(k1, v1, {a1});
        ctx.check_le(max_abs_diff(w, scaled(k1, a1)), ctx.tol(1e-15), "C = 1: w = alpha k");
        ctx.check_le(max_abs_diff(u, scaled(v1, a1)), ctx.tol(1e-15), "C = 1: u = alpha v");

        ChunkFactors f = ut_transform(k1, v1, {a1});
        ctx.check_true(f.t.at(0, 0) == a1, "C = 1: T = [alpha]");
        ctx.check_le(max_abs_diff(f.w, scaled(k1, a1)), ctx.tol(1e-15), "C = 1: W = alpha k^T");
    }

    {
        // orthogonal pair: no correction term
        Mat k(2, 3, {1.5, 0, 0, 0, 0.7, 0});
        Mat v = random_mat(rng, 2, 2);
        auto [w, u] = wy_sequential(k, v, {0.4, 0.9});
        ctx.check_true(w.at(1, 0) == 0.0 && w.at(1, 1) == 0.9 * 0.7, "orthogonal keys decouple");
    }

    {
        Mat k = random_mat(rng, 2, 5);
        Mat v = random_mat(rng, 2, 3);
        const double a1 = 0.6, a2 = 1.1;
        auto [w, u] = wy_sequential(k, v, {a1, a2});
        const double g = dot(k.row(1), k.row(0));
        Vec expect(5);
        for (std::size_t j = 0; j < 5; ++j) expect[j] = a2 * (k.at(1, j) - g * a1 * k.at(0, j));
        ctx.check_le(max_abs_diff(w.row(1), expect.span()), ctx.tol(1e-14),
                     "C = 2 closed form for w_2");

        ChunkFactors f = ut_transform(k, v, {a1, a2});
        ctx.check_true(f.t.at(0, 1) == 0.0, "T strictly upper is zero");
        ctx.check_near(f.t.at(0, 0), a1, ctx.tol(1e-15), "T(0,0) = alpha_1");
        ctx.check_near(f.t.at(1, 0), -a2 * g * a1, ctx.tol(1e-14), "T(1,0) = -a2 (k2.k1) a1");
        ctx.check_near(f.t.at(1, 1), a2, ctx.tol(1e-15), "T(1,1) = alpha_2");
    }

    // UT transform against the sequential recurrence, mixed alphas
    {
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            Mat k = rows_with_norm(rng, 16, 8, 1.5);
            Mat v = random_mat(rng, 16, 6);
            std::vector<double> alphas(16);
            for (double& a : alphas) a = rng.next_uniform(0.0, 1.2);
            auto [w, u] = wy_sequential(k, v, alphas);
            ChunkFactors f = ut_transform(k, v, alphas);
            worst = std::max(worst, max_abs_diff(f.w, w));
            worst = std::max(worst, max_abs_diff(f.u, u));
        }
        ctx.check_le(worst, ctx.tol(1e-10), "UT factors match the sequential recurrence");
    }

    // WY identity: product of transitions vs I - sum k_i w_i^T
    for (const Method& m : {Method::euler(), Method::efla(), Method::rk2()}) {
        Mat k = rows_with_norm(rng, 8, 6, 1.4);
        Mat v = random_mat(rng, 8, 4);
        std::vector<double> alphas(8);
        std::vector<StepInput> inputs;
        for (std::size_t r = 0; r < 8; ++r) {
            Vec kr(std::vector<double>(k.row(r).begin(), k.row(r).end()));
            Vec vr(std::vector<double>(v.row(r).begin(), v.row(r).end()));
            const double beta = 0.9;
            inputs.push_back({kr, vr, beta});
            alphas[r] = coefficients(m, beta, squared_norm(kr)).c_transition;
        }
        Mat p = decay_product(inputs, m);
        ChunkFactors f = ut_transform(k, v, alphas);
        Mat wy = Mat::identity(6);
        for (std::size_t r = 0; r < 8; ++r)
            for (std::size_t i = 0; i < 6; ++i)
                for (std::size_t j = 0; j < 6; ++j) wy.at(i, j) -= k.at(r, i) * f.w.at(r, j);
        ctx.check_le(max_abs_diff(p, wy), ctx.tol(1e-10), "P = I - sum k_i w_i^T under " + m.name());
    }

    // H identity: single zero-state chunk reduces to K^T U
    {
        SequenceBatch b = random_batch(rng, 12, 6, 5, 1.5, 1.5);
        ScanResult r = chunk_forward(Method::efla(), b, {12});
        Mat ck = b.k;
        std::vector<double> alphas(12);
        for (std::size_t t = 0; t < 12; ++t)
            alphas[t] = coefficients(Method::efla(), b.beta[t], dot(b.k.row(t), b.k.row(t))).c_transition;
        ChunkFactors f = ut_transform(b.k, b.v, alphas);
        ctx.check_le(max_abs_diff(r.final_state, matmul(transpose(b.k), f.u)), ctx.tol(1e-10),
                     "zero-state chunk result is K^T U");
    }

    // chunk sizes C = 1, C = L, and a partial trailing chunk
    {
        SequenceBatch b = random_batch(rng, 16, 8, 8, 1.5, 1.5);
        ScanResult seq = recurrent_forward(Method::efla(), b);
        ScanResult c1 = chunk_forward(Method::efla(), b, {1});
        ctx.check_le(max_abs_diff(c1.outputs, seq.outputs), ctx.tol(1e-12), "C = 1 output parity");
        ScanResult cl = chunk_forward(Method::efla(), b, {16});
        ctx.check_le(max_abs_diff(cl.outputs, seq.outputs), ctx.tol(1e-10), "single-chunk output parity");
    }
    {
        SequenceBatch b = random_batch(rng, 257, 32, 32, 1.5, 1.5);
        ScanResult seq = recurrent_forward(Method::euler(), b);
        ScanResult ch = chunk_forward(Method::euler(), b, {64});
        ctx.check_le(max_abs_diff(ch.outputs, seq.outputs), ctx.tol(1e-9), "partial trailing chunk");
        ctx.check_le(max_abs_diff(ch.final_state, seq.final_state), ctx.tol(1e-9),
                     "partial-chunk final state");
    }

    // vanilla rides the degenerate path (no decay, U = V)
    {
        SequenceBatch b = random_batch(rng, 23, 6, 4, 1.0, 1.5);
        ScanResult seq = recurrent_forward(Method::vanilla(), b);
        ScanResult ch = chunk_forward(Method::vanilla(), b, {4});
        ctx.check_le(max_abs_diff(ch.outputs, seq.outputs), ctx.tol(1e-10), "vanilla chunk parity");
        ctx.check_le(max_abs_diff(ch.final_state, seq.final_state), ctx.tol(1e-10),
                     "vanilla final state parity");
    }

    // per-token norm trace from the Gram accumulation matches the scan's
    {
        SequenceBatch b = random_batch(rng, 40, 8, 6, 1.5, 1.5);
        ScanResult seq = recurrent_forward(Method::efla(), b);
        ScanResult ch = chunk_forward(Method::efla(), b, {16});
        double worst = 0.0;
        for (std::size_t t = 0; t < 40; ++t)
            worst = std::max(worst, std::abs(seq.state_norm_trace[t] - ch.state_norm_trace[t]));
        ctx.check_le(worst, ctx.tol(1e-9), "chunked norm trace parity");
    }
}

void suite_equivalence(Ctx& ctx) {
    SplitMix64 rng = derive_stream(ctx.opt.seed, 110);
    const std::vector<Method> methods = {Method::euler(), Method::rk2(), Method::rk4(),
                                         Method::rkn(6), Method::efla()};
    const std::size_t chunk_sizes[] = {1, 2, 7, 16, 64};
    for (const Method& m : methods) {
        SequenceBatch b = random_batch(rng, 256, 32, 32, 2.0, 3.0, 4.0);
        ScanResult seq = recurrent_forward(m, b);
        for (std::size_t c : chunk_sizes) {
            ScanResult ch = chunk_forward(m, b, {c});
            ctx.check_le(max_abs_diff(ch.outputs, seq.outputs), ctx.tol(1e-9),
                         m.name() + " C=" + std::to_string(c) + " outputs");
            ctx.check_le(max_abs_diff(ch.final_state, seq.final_state), ctx.tol(1e-9),
                         m.name() + " C=" + std::to_string(c) + " final state");
        }
    }

    // results do not depend on the chunk size beyond roundoff
    {
        SequenceBatch b = random_batch(rng, 100, 16, 16, 2.0, 3.0, 4.0);
        ScanResult a = chunk_forward(Method::efla(), b, {5});
        ScanResult c = chunk_forward(Method::efla(), b, {11});
        ScanResult d = chunk_forward(Method::efla(), b, {64});
        ctx.check_le(max_abs_diff(a.outputs, c.outputs), ctx.tol(1e-9), "C = 5 vs C = 11");
        ctx.check_le(max_abs_diff(c.outputs, d.outputs), ctx.tol(1e-9), "C = 11 vs C = 64");
    }
}

void suite_kernel_lanes(Ctx& ctx) {
    if (!kernels::avx2_available()) {
        ctx.check_true(true, "avx2 lane not present; nothing to cross-check");
        return;
    }
    SplitMix64 rng = derive_stream(ctx.opt.seed, 111);
    const std::string prev = active().name;
    kernels::select("avx2");
    const Kernels& vec = active();
    const Kernels& ref = kernels::scalar();

    const std::size_t sizes[] = {1, 2, 3, 5, 7, 8, 13, 16, 31, 32, 64, 100};
    for (std::size_t n : sizes) {
        Vec a = random_vec(rng, n), b = random_vec(rng, n);
        double scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) scale += std::abs(a[i] * b[i]);
        ctx.check_le(std::abs(ref.dot(n, a.data(), b.data()) - vec.dot(n, a.data(), b.data())),
                     ctx.tol(1e-12) * (1.0 + scale), "dot lane parity n=" + std::to_string(n));
        ctx.check_le(std::abs(ref.sumsq(n, a.data()) - vec.sumsq(n, a.data())),
                     ctx.tol(1e-12) * (1.0 + scale), "sumsq lane parity n=" + std::to_string(n));

        Vec y1 = random_vec(rng, n);
        Vec y2 = y1;
        const double c = rng.next_uniform(-2.0, 2.0);
        ref.axpy(n, c, a.data(), y1.data());
        vec.axpy(n, c, a.data(), y2.data());
        ctx.check_le(max_abs_diff(y1.span(), y2.span()), ctx.tol(1e-13) * (1.0 + scale),
                     "axpy lane parity n=" + std::to_string(n));

        Vec s1 = y1;
        Vec s2 = y1;
        ref.scal(n, c, s1.data());
        vec.scal(n, c, s2.data());
        ctx.check_true(s1 == s2, "scal lane parity n=" + std::to_string(n));
    }

    const std::size_t shapes[][2] = {{5, 3}, {8, 8}, {17, 9}, {32, 32}, {33, 7}};
    for (auto [r, c] : shapes) {
        Mat s = random_mat(rng, r, c);
        Vec k = random_vec(rng, r), v = random_vec(rng, c);
        Vec o1(c), o2(c);
        ref.mat_tvec(r, c, s.data(), k.data(), o1.data());
        vec.mat_tvec(r, c, s.data(), k.data(), o2.data());
        ctx.check_le(max_abs_diff(o1.span(), o2.span()), ctx.tol(1e-12) * (1.0 + 4.0 * r),
                     "mat_tvec lane parity");

        Mat u1 = s, u2 = s;
        ref.rank1_update(r, c, 0.7, k.data(), v.data(), u1.data());
        vec.rank1_update(r, c, 0.7, k.data(), v.data(), u2.data());
        ctx.check_le(max_abs_diff(u1, u2), ctx.tol(1e-13) * 8.0, "rank1_update lane parity");

        Mat bmat = random_mat(rng, r, c);
        Vec t = random_vec(rng, c);
        Mat ya(r, c), yb(r, c), aa(r, c), ab(r, c);
        ref.rk_stage(r, c, s.data(), bmat.data(), k.data(), t.data(), 0.4, 0.15, ya.data(), aa.data());
        vec.rk_stage(r, c, s.data(), bmat.data(), k.data(), t.data(), 0.4, 0.15, yb.data(), ab.data());
        ctx.check_le(max_abs_diff(ya, yb), ctx.tol(1e-12), "rk_stage y lane parity");
        ctx.check_le(max_abs_diff(aa, ab), ctx.tol(1e-12), "rk_stage acc lane parity");
    }

    kernels::select(prev.c_str());
}

}  // namespace efla::verify
