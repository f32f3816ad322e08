#pragma once

#include <vector>

#include "hgen/rng.hpp"
#include "hgen/sparse.hpp"
#include "hgen/tensor.hpp"

namespace hgen {

// Differentiable operations. Each computes its value eagerly and records a
// backward closure onto the inputs' tape when any input carries a node.
// Mixing tensors from two different tapes is an error.

Tensor matmul(const Tensor& a, const Tensor& b);

// add/sub/mul allow the smaller operand to broadcast: 1 x c over rows,
// r x 1 over columns, 1 x 1 over everything. Gradients reduce back over
// the broadcast axes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, double c);
Tensor add_scalar(const Tensor& a, double c);

// Subgradient at 0 is the negative-side slope: 0 for relu, `slope` for
// leaky_relu, 1 for elu.
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope);
Tensor elu(const Tensor& a);

Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor transpose(const Tensor& a);
Tensor slice_cols(const Tensor& a, Index first, Index count);

Tensor row_mean(const Tensor& a);
// min/max gradients route to the first attaining column (lowest index wins
// ties).
Tensor row_min(const Tensor& a);
Tensor row_max(const Tensor& a);

// Row-wise (x - min) / (max - min) with min/max taken over each row.
// Rows whose spread is <= 1e-12 map to all zeros (and pass no gradient),
// which recovers uniform weighting downstream.
Tensor row_minmax_normalize(const Tensor& a);

Tensor sum_all(const Tensor& a);

// Inverted dropout mask: entries are 0 with probability rate, else
// 1/(1-rate). Constant (never differentiated); rate 0 yields all ones
// without consuming draws.
Tensor dropout_mask(Index rows, Index cols, double rate, Rng& rng);

// Mean over `subset` rows of -log softmax(logits)[label], computed with a
// per-row max shift. Gradient is (softmax - onehot)/|subset| on subset rows.
Tensor softmax_cross_entropy(const Tensor& logits,
                             const std::vector<int>& labels,
                             const std::vector<Index>& subset);

// Sum of absolute values; subgradient sign(x) with sign(0) = 0.
Tensor l1_norm(const Tensor& a);

// sp is constant; gradient flows to the dense operand only.
Tensor sparse_dense_matmul(const SparseRealMatrix& sp, const Tensor& d);

// Row softmax restricted to the mask's entries; zero elsewhere. Rows with
// an empty mask stay zero.
Tensor masked_row_softmax(const Tensor& scores, const SparseBoolMatrix& mask);

// Value-level helpers (no gradients).
Matrix softmax_rows(const Matrix& logits);

}  // namespace hgen
