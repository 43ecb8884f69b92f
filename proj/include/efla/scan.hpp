#pragma once

#include <cstddef>
#include <vector>

#include "efla/integrators.hpp"
#include "efla/linalg.hpp"

namespace efla {

// Token sequence, one row per token. q/k share width d_k; v has width d_v.
struct SequenceBatch {
    Mat q, k, v;
    std::vector<double> beta;

    std::size_t length() const { return beta.size(); }
    void validate() const;
};

struct ScanResult {
    Mat outputs;                           // L x d_v, o_t = S_t^T q_t
    Mat final_state;                       // d_k x d_v
    std::vector<double> state_norm_trace;  // Frobenius norm of S_t, length L
    long long divergence_index = -1;       // first t with non-finite state, -1 if none
};

// Sequential ground-truth scan. S0 = zero when null. Divergence is
// recorded, not thrown: instability experiments measure time-to-blowup.
ScanResult recurrent_forward(const Method& method, const SequenceBatch& batch,
                             const Mat* s0 = nullptr);

struct NormalizeReport {
    SequenceBatch batch;
    std::size_t zero_vectors = 0;  // rows left untouched because their norm is zero
};
NormalizeReport normalize_keys(const SequenceBatch& batch, bool normalize_queries = false);

}  // namespace efla
