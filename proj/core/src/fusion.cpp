#include "hgen/fusion.hpp"

#include "hgen/error.hpp"
#include "hgen/gnn.hpp"

namespace hgen {

FusionParams FusionParams::create(ParamStore& store, int path_index,
                                  int replicas, Index hidden_dim,
                                  Index attention_dim, Rng& init) {
  if (replicas < 1) throw ValidationError("fusion: need at least one replica");
  if (attention_dim < 1)
    throw ValidationError("fusion: attention_dim must be >= 1");
  FusionParams p;
  p.attention_dim = attention_dim;
  const std::string prefix = "fusion." + std::to_string(path_index) + ".";
  for (int j = 0; j < replicas; ++j) {
    p.compressors.push_back(
        store.add(prefix + "compressor" + std::to_string(j),
                  glorot_uniform(hidden_dim, attention_dim, init)));
  }
  p.projector = store.add(
      prefix + "projector",
      Matrix(static_cast<Index>(replicas) * attention_dim, replicas));
  return p;
}

AttentionTrace attention_scores(TapeBinder& binder, const FusionParams& params,
                                const std::vector<Tensor>& embeddings) {
  const int k = params.replicas();
  if (static_cast<int>(embeddings.size()) != k)
    throw ShapeError("attention_scores: embedding count != replica count");
  for (const Tensor& h : embeddings)
    if (h.rows() != embeddings.front().rows() ||
        h.cols() != embeddings.front().cols())
      throw ShapeError("attention_scores: embeddings differ in shape");

  std::vector<Tensor> compressed;
  compressed.reserve(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j)
    compressed.push_back(
        matmul(embeddings[static_cast<std::size_t>(j)],
               binder.use(params.compressors[static_cast<std::size_t>(j)])));

  AttentionTrace trace;
  trace.raw = matmul(concat_cols(compressed), binder.use(params.projector));
  Tensor centered = sub(trace.raw, row_mean(trace.raw));
  trace.normalized = row_minmax_normalize(centered);
  trace.weights = add_scalar(trace.normalized, 1.0 / static_cast<double>(k));
  return trace;
}

Tensor fuse(const AttentionTrace& trace, const std::vector<Tensor>& embeddings) {
  const auto k = static_cast<int>(embeddings.size());
  if (trace.weights.cols() != k)
    throw ShapeError("fuse: trace does not match embedding count");
  if (trace.weights.rows() != embeddings.front().rows())
    throw ShapeError("fuse: trace row count mismatch");
  Tensor acc;
  for (int j = 0; j < k; ++j) {
    Tensor weighted = mul(embeddings[static_cast<std::size_t>(j)],
                          slice_cols(trace.weights, j, 1));
    acc = j == 0 ? weighted : add(acc, weighted);
  }
  return acc;
}

AttentionTrace uniform_trace(Index n, int replicas) {
  AttentionTrace trace;
  trace.raw = Tensor(Matrix(n, replicas, 0.0));
  trace.normalized = Tensor(Matrix(n, replicas, 0.0));
  trace.weights =
      Tensor(Matrix(n, replicas, 1.0 / static_cast<double>(replicas)));
  return trace;
}

}  // namespace hgen
