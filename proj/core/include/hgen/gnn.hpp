#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hgen/binding.hpp"
#include "hgen/metapath.hpp"
#include "hgen/ops.hpp"
#include "hgen/rng.hpp"

namespace hgen {

enum class Backbone { gcn, sage, gat };
enum class Activation { relu, elu };

Backbone backbone_from_string(const std::string& s);
std::string to_string(Backbone b);

struct AlleleConfig {
  Backbone backbone = Backbone::gcn;
  int num_layers = 2;
  Index hidden_dim = 64;
  double dropout = 0.3;
  std::uint64_t seed = 0;
  int gat_heads = 2;
  double leaky_slope = 0.2;
  // resolved per backbone when unset: relu for gcn/sage, elu for gat
  std::optional<Activation> activation;

  Activation resolved_activation() const {
    if (activation) return *activation;
    return backbone == Backbone::gat ? Activation::elu : Activation::relu;
  }

  void validate() const;
};

/// Neighborhood structures a backbone needs beyond the GCN operator.
/// Owned by the model so they outlive every tape built over them.
struct PathOperators {
  MetaPathGraph graph;
  SparseRealMatrix neighbor_mean;       // row-normalized adjacency (zero rows stay zero)
  SparseBoolMatrix closed_neighborhood; // adjacency union diagonal

  static PathOperators build(MetaPathGraph mpg);
};

/// One base GNN bound to one meta-path and one replica slot: a projection
/// layer plus L message-passing layers. Replicas differ by rng stream
/// (initialization and dropout masks).
class AlleleLearner {
 public:
  AlleleLearner(ParamStore& store, const AlleleConfig& cfg, Index input_dim,
                int path_index, int replica_index);

  /// H0 = act(dropout(X) W0); eval mode skips the mask entirely.
  Tensor project(TapeBinder& binder, const Tensor& features, bool train_mode);

  /// L message-passing layers on top of H0.
  Tensor propagate(TapeBinder& binder, const PathOperators& ops,
                   const Tensor& h0);

  /// project + propagate.
  Tensor embed(TapeBinder& binder, const PathOperators& ops,
               const Tensor& features, bool train_mode);

  int path_index() const { return path_index_; }
  int replica_index() const { return replica_index_; }
  const AlleleConfig& config() const { return cfg_; }

  Rng& dropout_rng() { return dropout_rng_; }
  const Rng& dropout_rng() const { return dropout_rng_; }
  void set_dropout_rng(Rng rng) { dropout_rng_ = std::move(rng); }

 private:
  struct GatHead {
    int weight;
    int attn_src;
    int attn_dst;
  };
  struct Layer {
    int weight = -1;       // gcn
    int weight_self = -1;  // sage
    int weight_nbr = -1;
    std::vector<GatHead> heads;  // gat
  };

  Tensor activate(const Tensor& x) const;
  Tensor gat_layer(TapeBinder& binder, const PathOperators& ops,
                   const Tensor& h, const Layer& layer) const;

  AlleleConfig cfg_;
  ParamStore* store_;
  int projection_ = -1;
  std::vector<Layer> layers_;
  int path_index_;
  int replica_index_;
  Rng dropout_rng_;
};

/// Uniform Glorot init: U(-s, s) with s = sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(Index rows, Index cols, Rng& rng);

}  // namespace hgen
