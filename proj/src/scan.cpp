#include "efla/scan.hpp"

#include <cmath>
#include <stdexcept>

#include "efla/kernels.hpp"

namespace efla {

void SequenceBatch::validate() const {
    const std::size_t l = beta.size();
    if (l < 1) throw std::invalid_argument("SequenceBatch: length must be >= 1");
    if (q.rows() != l || k.rows() != l || v.rows() != l)
        throw std::invalid_argument("SequenceBatch: q/k/v row counts must equal len(beta)");
    if (q.cols() != k.cols()) throw std::invalid_argument("SequenceBatch: q and k widths differ");
    for (double b : beta)
        if (!std::isfinite(b) || b < 0.0)
            throw std::invalid_argument("SequenceBatch: beta entries must be finite and >= 0");
    if (!all_finite({q.data(), q.size()}) || !all_finite({k.data(), k.size()}) ||
        !all_finite({v.data(), v.size()}))
        throw std::invalid_argument("SequenceBatch: non-finite entries");
}

ScanResult recurrent_forward(const Method& method, const SequenceBatch& batch, const Mat* s0) {
    batch.validate();
    const std::size_t l = batch.length();
    const std::size_t dk = batch.k.cols();
    const std::size_t dv = batch.v.cols();
    Mat s = s0 ? *s0 : Mat(dk, dv);
    if (s.rows() != dk || s.cols() != dv) throw std::invalid_argument("recurrent_forward: S0 shape mismatch");

    ScanResult res;
    res.outputs = Mat(l, dv);
    res.state_norm_trace.assign(l, 0.0);
    Vec scratch(dv);
    const Kernels& kn = active();
    for (std::size_t t = 0; t < l; ++t) {
        step_core(method, s, batch.k.row(t), batch.v.row(t), batch.beta[t], scratch);
        kn.mat_tvec(dk, dv, s.data(), batch.q.row(t).data(), res.outputs.row(t).data());
        const double ns = std::sqrt(kn.sumsq(s.size(), s.data()));
        res.state_norm_trace[t] = ns;
        if (res.divergence_index < 0 && !std::isfinite(ns))
            res.divergence_index = static_cast<long long>(t);
    }
    res.final_state = std::move(s);
    return res;
}

NormalizeReport normalize_keys(const SequenceBatch& batch, bool normalize_queries) {
    batch.validate();
    NormalizeReport rep;
    rep.batch = batch;
    const Kernels& kn = active();
    auto normalize_rows = [&](Mat& m) {
        for (std::size_t t = 0; t < m.rows(); ++t) {
            auto row = m.row(t);
            const double n = std::sqrt(kn.sumsq(row.size(), row.data()));
            if (n == 0.0) {
                ++rep.zero_vectors;
            } else {
                kn.scal(row.size(), 1.0 / n, row.data());
            }
        }
    };
    normalize_rows(rep.batch.k);
    if (normalize_queries) normalize_rows(rep.batch.q);
    return rep;
}

}  // namespace efla
