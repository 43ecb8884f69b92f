#include "efla/chunkwise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "efla/kernels.hpp"

namespace efla {

std::pair<Mat, Mat> wy_sequential(const Mat& chunk_k, const Mat& chunk_v,
                                  const std::vector<double>& alphas) {
    const std::size_t c = chunk_k.rows();
    if (chunk_v.rows() != c || alphas.size() != c)
        throw std::invalid_argument("wy_sequential: inconsistent chunk lengths");
    const Kernels& kn = active();
    Mat w(c, chunk_k.cols());
    Mat u(c, chunk_v.cols());
    for (std::size_t r = 0; r < c; ++r) {
        auto wr = w.row(r);
        auto ur = u.row(r);
        std::copy_n(chunk_k.row(r).data(), wr.size(), wr.data());
        std::copy_n(chunk_v.row(r).data(), ur.size(), ur.data());
        for (std::size_t i = 0; i < r; ++i) {
            const double g = kn.dot(wr.size(), chunk_k.row(r).data(), chunk_k.row(i).data());
            kn.axpy(wr.size(), -g, w.row(i).data(), wr.data());
            kn.axpy(ur.size(), -g, u.row(i).data(), ur.data());
        }
        kn.scal(wr.size(), alphas[r], wr.data());
        kn.scal(ur.size(), alphas[r], ur.data());
    }
    return {std::move(w), std::move(u)};
}

ChunkFactors ut_transform(const Mat& chunk_k, const Mat& chunk_v,
                          const std::vector<double>& alphas) {
    const std::size_t c = chunk_k.rows();
    if (c < 1) throw std::invalid_argument("ut_transform: empty chunk");
    if (chunk_v.rows() != c || alphas.size() != c)
        throw std::invalid_argument("ut_transform: inconsistent chunk lengths");
    const Kernels& kn = active();
    Mat lsys = Mat::identity(c);
    for (std::size_t r = 1; r < c; ++r)
        for (std::size_t i = 0; i < r; ++i)
            lsys.at(r, i) =
                alphas[r] * kn.dot(chunk_k.cols(), chunk_k.row(r).data(), chunk_k.row(i).data());
    Mat rhs(c, c);
    for (std::size_t r = 0; r < c; ++r) rhs.at(r, r) = alphas[r];
    ChunkFactors f;
    f.t = unit_lower_solve(lsys, rhs);
    f.w = matmul(f.t, chunk_k);
    f.u = matmul(f.t, chunk_v);
    f.alphas = alphas;
    return f;
}

ScanResult chunk_forward(const Method& method, const SequenceBatch& batch, const ChunkPlan& plan,
                         const Mat* s0) {
    batch.validate();
    if (plan.chunk_size < 1) throw std::invalid_argument("chunk_forward: chunk_size must be >= 1");
    if (!method.is_ode_family() && method.kind != MethodKind::VanillaLinear)
        throw std::invalid_argument("chunk_forward: method has no single-step scalar form");
    const std::size_t l = batch.length();
    const std::size_t dk = batch.k.cols();
    const std::size_t dv = batch.v.cols();
    Mat s = s0 ? *s0 : Mat(dk, dv);
    if (s.rows() != dk || s.cols() != dv) throw std::invalid_argument("chunk_forward: S0 shape mismatch");

    ScanResult res;
    res.outputs = Mat(l, dv);
    res.state_norm_trace.assign(l, 0.0);
    const Kernels& kn = active();
    const bool vanilla = method.kind == MethodKind::VanillaLinear;

    for (std::size_t start = 0; start < l; start += plan.chunk_size) {
        const std::size_t c = std::min(plan.chunk_size, l - start);
        Mat ck(c, dk), cq(c, dk), cv(c, dv);
        std::vector<double> alphas(c);
        for (std::size_t r = 0; r < c; ++r) {
            std::copy_n(batch.k.row(start + r).data(), dk, ck.row(r).data());
            std::copy_n(batch.q.row(start + r).data(), dk, cq.row(r).data());
            std::copy_n(batch.v.row(start + r).data(), dv, cv.row(r).data());
            if (vanilla) {
                alphas[r] = 1.0;
            } else {
                const double lambda = kn.sumsq(dk, ck.row(r).data());
                alphas[r] = coefficients(method, batch.beta[start + r], lambda).c_transition;
            }
        }

        Mat w, u;
        if (vanilla) {
            w = Mat(c, dk);
            u = cv;
        } else {
            ChunkFactors f = ut_transform(ck, cv, alphas);
            w = std::move(f.w);
            u = std::move(f.u);
        }
        Mat uprime = sub(u, matmul(w, s));  // rows: u_i - S^T w_i

        Mat o1 = matmul(cq, s);
        Mat cross = matmul(cq, transpose(ck));  // cross(r,i) = q_r . k_i
        for (std::size_t r = 0; r < c; ++r)
            for (std::size_t i = r + 1; i < c; ++i) cross.at(r, i) = 0.0;
        Mat o2 = matmul(cross, uprime);
        for (std::size_t r = 0; r < c; ++r)
            for (std::size_t j = 0; j < dv; ++j)
                res.outputs.at(start + r, j) = o1.at(r, j) + o2.at(r, j);

        // Per-token norms without materializing intermediate states:
        // S_t = S + sum_{i<=t} k_i u'_i^T, so ||S_t||_F^2 unfolds into
        // Gram terms of K and U' plus projections of S.
        Mat ks = matmul(ck, s);                    // row i: k_i^T S
        Mat gram = matmul(ck, transpose(ck));      // k_i . k_j
        Mat du = matmul(uprime, transpose(uprime));  // u'_i . u'_j
        double acc = kn.sumsq(s.size(), s.data());
        for (std::size_t r = 0; r < c; ++r) {
            const double proj = kn.dot(dv, ks.row(r).data(), uprime.row(r).data());
            double cross_sum = 0.0;
            for (std::size_t i = 0; i < r; ++i) cross_sum += gram.at(r, i) * du.at(r, i);
            acc += 2.0 * proj + gram.at(r, r) * du.at(r, r) + 2.0 * cross_sum;
            const double ns = std::sqrt(std::max(acc, 0.0));
            res.state_norm_trace[start + r] = ns;
            if (res.divergence_index < 0 && !std::isfinite(ns))
                res.divergence_index = static_cast<long long>(start + r);
        }

        s = add(s, matmul(transpose(ck), uprime));
    }
    res.final_state = std::move(s);
    return res;
}

Mat decay_product(const std::vector<StepInput>& inputs, const Method& method) {
    if (inputs.empty()) throw std::invalid_argument("decay_product: empty input list");
    const std::size_t d = inputs.front().k.size();
    Mat p = Mat::identity(d);
    for (const StepInput& in : inputs) {
        if (in.k.size() != d) throw std::invalid_argument("decay_product: key dimension mismatch");
        const double lambda = squared_norm(in.k);
        const double c = coefficients(method, in.beta, lambda).c_transition;
        p = matmul(transition_matrix(in.k, c), p);
    }
    return p;
}

}  // namespace efla
