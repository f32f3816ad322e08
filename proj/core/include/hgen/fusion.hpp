#pragma once

#include <vector>

#include "hgen/binding.hpp"
#include "hgen/ops.hpp"

namespace hgen {

/// Per-meta-path fusion parameters: one compressor per replica (h x a) and
/// a shared projector ((k*a) x k). The projector starts at zero so fusion
/// begins exactly at the mean-ensemble precondition; compressors are
/// Glorot.
struct FusionParams {
  std::vector<int> compressors;
  int projector = -1;
  Index attention_dim = 0;

  int replicas() const { return static_cast<int>(compressors.size()); }

  static FusionParams create(ParamStore& store, int path_index, int replicas,
                             Index hidden_dim, Index attention_dim, Rng& init);
};

/// Attention pipeline intermediates: raw scores, their row-centered
/// min-max normalization, and the residual weights (normalized + 1/k).
/// Every weight entry lies in [1/k, 1 + 1/k].
struct AttentionTrace {
  Tensor raw;         // n x k
  Tensor normalized;  // n x k, entries in [0, 1]
  Tensor weights;     // n x k
};

/// Raw scores are concat_j(H_j W_j) W'; they are row-centered and min-max
/// normalized per node row. Rows whose centered scores are constant
/// (spread <= 1e-12) normalize to zero, recovering uniform 1/k weights.
AttentionTrace attention_scores(TapeBinder& binder, const FusionParams& params,
                                const std::vector<Tensor>& embeddings);

/// Node-wise weighted sum of the replica embeddings under the trace's
/// weight columns; differentiable end to end including the min/max
/// subgradients.
Tensor fuse(const AttentionTrace& trace, const std::vector<Tensor>& embeddings);

/// Uniform-weight trace (all entries exactly 1/k); the naive-voting branch
/// shares fuse() so its arithmetic matches degenerate residual attention
/// bit for bit.
AttentionTrace uniform_trace(Index n, int replicas);

}  // namespace hgen
