#include "hgen/gnn.hpp"

#include <cmath>

#include "hgen/error.hpp"

namespace hgen {

namespace {
// rng stream tags
constexpr std::uint64_t kInitTag = 0x1217;
constexpr std::uint64_t kDropTag = 0xd20b;
}  // namespace

Backbone backbone_from_string(const std::string& s) {
  if (s == "gcn") return Backbone::gcn;
  if (s == "sage") return Backbone::sage;
  if (s == "gat") return Backbone::gat;
  throw ValidationError("unknown backbone '" + s + "' (expected gcn|sage|gat)");
}

std::string to_string(Backbone b) {
  switch (b) {
    case Backbone::gcn: return "gcn";
    case Backbone::sage: return "sage";
    case Backbone::gat: return "gat";
  }
  return "?";
}

void AlleleConfig::validate() const {
  if (num_layers < 1)
    throw ValidationError("allele config: need at least one layer");
  if (hidden_dim < 1)
    throw ValidationError("allele config: hidden_dim must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0)
    throw ValidationError("allele config: dropout must be in [0, 1)");
  if (backbone == Backbone::gat && gat_heads < 1)
    throw ValidationError("allele config: gat_heads must be >= 1");
}

Matrix glorot_uniform(Index rows, Index cols, Rng& rng) {
  const double s = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (Index i = 0, n = m.size(); i < n; ++i)
    m.data()[i] = rng.uniform(-s, s);
  return m;
}

PathOperators PathOperators::build(MetaPathGraph mpg) {
  PathOperators ops;
  const Index n = mpg.adjacency.rows();

  std::vector<std::vector<std::pair<Index, double>>> mean_rows(
      static_cast<std::size_t>(n));
  for (Index r = 0; r < n; ++r) {
    auto row = mpg.adjacency.row(r);
    if (row.empty()) continue;  // isolated: zero neighbor mean
    const double inv = 1.0 / static_cast<double>(row.size());
    for (Index c : row) mean_rows[static_cast<std::size_t>(r)].emplace_back(c, inv);
  }
  ops.neighbor_mean = SparseRealMatrix::from_rows(n, n, mean_rows);

  std::vector<std::pair<Index, Index>> closed;
  for (Index r = 0; r < n; ++r) {
    closed.emplace_back(r, r);
    for (Index c : mpg.adjacency.row(r)) closed.emplace_back(r, c);
  }
  ops.closed_neighborhood = SparseBoolMatrix::from_pairs(n, n, closed);

  ops.graph = std::move(mpg);
  return ops;
}

AlleleLearner::AlleleLearner(ParamStore& store, const AlleleConfig& cfg,
                             Index input_dim, int path_index, int replica_index)
    : cfg_(cfg),
      store_(&store),
      path_index_(path_index),
      replica_index_(replica_index),
      dropout_rng_(Rng::derive(cfg.seed, kDropTag,
                               static_cast<std::uint64_t>(path_index),
                               static_cast<std::uint64_t>(replica_index))) {
  cfg_.validate();
  Rng init(Rng::derive(cfg.seed, kInitTag,
                       static_cast<std::uint64_t>(path_index),
                       static_cast<std::uint64_t>(replica_index)));
  const std::string prefix = "allele." + std::to_string(path_index) + "." +
                             std::to_string(replica_index) + ".";
  const Index h = cfg_.hidden_dim;
  projection_ = store.add(prefix + "projection",
                          glorot_uniform(input_dim, h, init));
  layers_.resize(static_cast<std::size_t>(cfg_.num_layers));
  for (int l = 0; l < cfg_.num_layers; ++l) {
    Layer& layer = layers_[static_cast<std::size_t>(l)];
    const std::string lp = prefix + "layer" + std::to_string(l) + ".";
    switch (cfg_.backbone) {
      case Backbone::gcn:
        layer.weight = store.add(lp + "weight", glorot_uniform(h, h, init));
        break;
      case Backbone::sage:
        layer.weight_self = store.add(lp + "self", glorot_uniform(h, h, init));
        layer.weight_nbr = store.add(lp + "nbr", glorot_uniform(h, h, init));
        break;
      case Backbone::gat:
        for (int head = 0; head < cfg_.gat_heads; ++head) {
          const std::string hp = lp + "head" + std::to_string(head) + ".";
          GatHead gh;
          gh.weight = store.add(hp + "weight", glorot_uniform(h, h, init));
          gh.attn_src = store.add(hp + "attn_src", glorot_uniform(h, 1, init));
          gh.attn_dst = store.add(hp + "attn_dst", glorot_uniform(h, 1, init));
          layer.heads.push_back(gh);
        }
        break;
    }
  }
}

Tensor AlleleLearner::activate(const Tensor& x) const {
  return cfg_.resolved_activation() == Activation::relu ? relu(x) : elu(x);
}

Tensor AlleleLearner::project(TapeBinder& binder, const Tensor& features,
                              bool train_mode) {
  Tensor x = features;
  if (train_mode && cfg_.dropout > 0.0) {
    Tensor mask =
        dropout_mask(x.rows(), x.cols(), cfg_.dropout, dropout_rng_);
    x = mul(x, mask);
  }
  return activate(matmul(x, binder.use(projection_)));
}

Tensor AlleleLearner::propagate(TapeBinder& binder, const PathOperators& ops,
                                const Tensor& h0) {
  Tensor h = h0;
  for (const Layer& layer : layers_) {
    switch (cfg_.backbone) {
      case Backbone::gcn:
        h = activate(sparse_dense_matmul(ops.graph.norm_operator,
                                         matmul(h, binder.use(layer.weight))));
        break;
      case Backbone::sage: {
        Tensor self_term = matmul(h, binder.use(layer.weight_self));
        Tensor nbr_term = matmul(sparse_dense_matmul(ops.neighbor_mean, h),
                                 binder.use(layer.weight_nbr));
        h = activate(add(self_term, nbr_term));
        break;
      }
      case Backbone::gat:
        h = gat_layer(binder, ops, h, layer);
        break;
    }
  }
  return h;
}

Tensor AlleleLearner::gat_layer(TapeBinder& binder, const PathOperators& ops,
                                const Tensor& h, const Layer& layer) const {
  const Index n = h.rows();
  const Tensor ones_row(Matrix(1, n, 1.0));
  const Tensor ones_col(Matrix(n, 1, 1.0));
  Tensor acc;
  for (std::size_t head = 0; head < layer.heads.size(); ++head) {
    const GatHead& gh = layer.heads[head];
    Tensor hw = matmul(h, binder.use(gh.weight));
    Tensor s = matmul(hw, binder.use(gh.attn_src));  // n x 1
    Tensor t = matmul(hw, binder.use(gh.attn_dst));  // n x 1
    // e_uv = leaky(s_u + t_v) over the closed neighborhood
    Tensor raw = add(matmul(s, ones_row), matmul(ones_col, transpose(t)));
    Tensor alpha = masked_row_softmax(leaky_relu(raw, cfg_.leaky_slope),
                                      ops.closed_neighborhood);
    Tensor out = matmul(alpha, hw);
    acc = head == 0 ? out : add(acc, out);
  }
  if (layer.heads.size() > 1)
    acc = scale(acc, 1.0 / static_cast<double>(layer.heads.size()));
  return activate(acc);
}

Tensor AlleleLearner::embed(TapeBinder& binder, const PathOperators& ops,
                            const Tensor& features, bool train_mode) {
  return propagate(binder, ops, project(binder, features, train_mode));
}

}  // namespace hgen
