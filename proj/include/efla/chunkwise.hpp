#pragma once

#include <utility>
#include <vector>

#include "efla/integrators.hpp"
#include "efla/scan.hpp"

namespace efla {

// Trailing partial chunks are processed as smaller chunks, not padded.
struct ChunkPlan {
    std::size_t chunk_size = 64;
};

struct ChunkFactors {
    Mat t;                       // C x C, T = (I + StrictTril(diag(a) K K^T))^{-1} diag(a)
    Mat w;                       // C x d_k, W = T K
    Mat u;                       // C x d_v, U = T V
    std::vector<double> alphas;  // per-token effective rates
};

// w_r = a_r (k_r - sum_{i<r} (k_r.k_i) w_i), u_r likewise with v_r.
std::pair<Mat, Mat> wy_sequential(const Mat& chunk_k, const Mat& chunk_v,
                                  const std::vector<double>& alphas);

// Same factors via one unit-lower-triangular solve; never inverts T.
ChunkFactors ut_transform(const Mat& chunk_k, const Mat& chunk_v,
                          const std::vector<double>& alphas);

// Chunk recurrence: S_next = S + K^T (U - W S); outputs
// O = Q S + (Q K^T .* M)(U - W S) with M the lower-triangular mask
// INCLUDING the diagonal (token r reads its own update). Accepts every
// method with a per-token scalar rate plus vanilla (W = 0, U = V).
ScanResult chunk_forward(const Method& method, const SequenceBatch& batch, const ChunkPlan& plan,
                         const Mat* s0 = nullptr);

// Explicit product (I - c_n k_n k_n^T) ... (I - c_1 k_1 k_1^T), newest
// factor on the left; oracle for the WY identity P = I - sum k_i w_i^T.
Mat decay_product(const std::vector<StepInput>& inputs, const Method& method);

}  // namespace efla
