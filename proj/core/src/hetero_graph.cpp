#include "hgen/hetero_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hgen/error.hpp"

namespace hgen {

using ordered_json = nlohmann::ordered_json;

Index HeteroGraph::num_targets() const {
  auto it = node_counts.find(target_type);
  return it == node_counts.end() ? 0 : it->second;
}

int HeteroGraph::num_classes() const {
  int q = 0;
  for (int y : labels) q = std::max(q, y + 1);
  return std::max(q, 1);
}

void HeteroGraph::validate() const {
  if (!node_counts.count(target_type))
    throw ValidationError("heterograph: unknown target type '" + target_type +
                          "'");
  const Index n = num_targets();

  for (const auto& [name, et] : edge_lists) {
    auto src_it = node_counts.find(et.src_type);
    auto dst_it = node_counts.find(et.dst_type);
    if (src_it == node_counts.end() || dst_it == node_counts.end())
      throw ValidationError("heterograph: edge type '" + name +
                            "' references undeclared node type");
    for (auto [s, d] : et.pairs) {
      if (s < 0 || s >= src_it->second || d < 0 || d >= dst_it->second)
        throw ValidationError("heterograph: dangling edge index in edge type '" +
                              name + "'");
    }
  }

  if (features.rows() != n)
    throw ValidationError("heterograph: features must have one row per target node");
  if (static_cast<Index>(labels.size()) != n)
    throw ValidationError("heterograph: labels length must equal target count");
  for (int y : labels)
    if (y < 0)
      throw ValidationError("heterograph: negative class label");

  std::set<Index> seen;
  auto check_split = [&](const std::vector<Index>& idx, const char* which) {
    for (Index i : idx) {
      if (i < 0 || i >= n)
        throw ValidationError(std::string("heterograph: ") + which +
                              " split index out of range");
      if (!seen.insert(i).second)
        throw ValidationError("heterograph: split overlap at node index " +
                              std::to_string(i));
    }
  };
  check_split(train_idx, "train");
  check_split(val_idx, "val");
  check_split(test_idx, "test");

  for (const MetaPath& path : meta_paths) {
    if (path.empty())
      throw ValidationError("heterograph: empty meta-path");
    std::vector<const EdgeTypeList*> steps;
    for (const std::string& step : path) {
      auto it = edge_lists.find(step);
      if (it == edge_lists.end())
        throw ValidationError("heterograph: meta-path step '" + step +
                              "' is not a declared edge type");
      steps.push_back(&it->second);
    }
    if (steps.front()->src_type != target_type ||
        steps.back()->dst_type != target_type)
      throw ValidationError(
          "heterograph: meta-path must start and end at the target type");
    for (std::size_t s = 0; s + 1 < steps.size(); ++s) {
      if (steps[s]->dst_type != steps[s + 1]->src_type)
        throw ValidationError("heterograph: type-inconsistent meta-path at step " +
                              std::to_string(s));
    }
    // palindromic type signature: step s mirrors step S-1-s
    for (std::size_t s = 0; s < steps.size(); ++s) {
      const auto* fwd = steps[s];
      const auto* rev = steps[steps.size() - 1 - s];
      if (fwd->src_type != rev->dst_type || fwd->dst_type != rev->src_type)
        throw ValidationError("heterograph: asymmetric meta-path");
    }
  }
}

std::vector<std::vector<double>> SyntheticSpec::default_centers(int q, Index f,
                                                                double scale) {
  std::vector<std::vector<double>> centers(static_cast<std::size_t>(q));
  for (int c = 0; c < q; ++c) {
    centers[static_cast<std::size_t>(c)].assign(static_cast<std::size_t>(f), 0.0);
    for (Index d = 0; d < f; ++d)
      if (d % q == c) centers[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)] = scale;
  }
  return centers;
}

void SyntheticSpec::validate() const {
  if (num_classes < 2)
    throw ValidationError("synthetic spec: need at least two classes");
  if (num_target_nodes < 1)
    throw ValidationError("synthetic spec: need at least one target node");
  if (class_centers.size() != static_cast<std::size_t>(num_classes))
    throw ValidationError("synthetic spec: need one feature center per class");
  const std::size_t f = class_centers.front().size();
  if (f == 0) throw ValidationError("synthetic spec: empty feature centers");
  for (const auto& c : class_centers)
    if (c.size() != f)
      throw ValidationError("synthetic spec: ragged feature centers");
  if (noise_scale < 0.0)
    throw ValidationError("synthetic spec: negative noise scale");
  if (aux_types.empty())
    throw ValidationError("synthetic spec: need at least one auxiliary type");
  for (const auto& aux : aux_types) {
    if (aux.count < 1)
      throw ValidationError("synthetic spec: auxiliary type size must be >= 1");
    if (aux.p_intra < 0.0 || aux.p_intra > 1.0 || aux.p_inter < 0.0 ||
        aux.p_inter > 1.0)
      throw ValidationError("synthetic spec: connection probabilities must be in [0, 1]");
    if (aux.name == target_type)
      throw ValidationError("synthetic spec: auxiliary type clashes with target type");
  }
  if (std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9)
    throw ValidationError("synthetic spec: split ratios must sum to 1");
}

namespace {

// contiguous class blocks: nodes [c*n/q, (c+1)*n/q) get class c
int block_class(Index i, Index n, int q) {
  return static_cast<int>((i * q) / n);
}

}  // namespace

HeteroGraph generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const Index n = spec.num_target_nodes;
  const int q = spec.num_classes;
  const Index f = static_cast<Index>(spec.class_centers.front().size());

  HeteroGraph g;
  g.target_type = spec.target_type;
  g.node_counts[spec.target_type] = n;

  g.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    g.labels[static_cast<std::size_t>(i)] = block_class(i, n, q);

  Rng feat_rng(Rng::derive(spec.seed, /*tag=*/0xfea7));
  g.features = Matrix(n, f);
  for (Index i = 0; i < n; ++i) {
    const auto& center =
        spec.class_centers[static_cast<std::size_t>(g.labels[static_cast<std::size_t>(i)])];
    for (Index d = 0; d < f; ++d)
      g.features(i, d) = center[static_cast<std::size_t>(d)] +
                         spec.noise_scale * feat_rng.normal();
  }

  for (std::size_t a = 0; a < spec.aux_types.size(); ++a) {
    const auto& aux = spec.aux_types[a];
    g.node_counts[aux.name] = aux.count;
    const std::string fwd_name = spec.target_type + "-" + aux.name;
    const std::string rev_name = aux.name + "-" + spec.target_type;
    EdgeTypeList fwd{spec.target_type, aux.name, {}};
    EdgeTypeList rev{aux.name, spec.target_type, {}};
    Rng edge_rng(Rng::derive(spec.seed, /*tag=*/0xed6e, a));
    for (Index u = 0; u < n; ++u) {
      const int cu = g.labels[static_cast<std::size_t>(u)];
      for (Index v = 0; v < aux.count; ++v) {
        const int cv = block_class(v, aux.count, q);
        const double p = (cu == cv) ? aux.p_intra : aux.p_inter;
        if (edge_rng.bernoulli(p)) {
          fwd.pairs.emplace_back(u, v);
          rev.pairs.emplace_back(v, u);
        }
      }
    }
    g.edge_lists[fwd_name] = std::move(fwd);
    g.edge_lists[rev_name] = std::move(rev);
    g.meta_paths.push_back({fwd_name, rev_name});
  }

  auto splits = split_nodes(n, spec.train_ratio, spec.val_ratio,
                            spec.test_ratio, Rng::derive(spec.seed, 0x5b71));
  g.train_idx = std::move(splits.train);
  g.val_idx = std::move(splits.val);
  g.test_idx = std::move(splits.test);

  g.validate();
  return g;
}

SplitIndices split_nodes(Index n, double train_ratio, double val_ratio,
                         double test_ratio, std::uint64_t seed) {
  if (std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9)
    throw ValidationError("split_nodes: ratios must sum to 1");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed);
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(i + 1)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  const auto nd = static_cast<double>(n);
  const Index n_train = static_cast<Index>(std::floor(nd * train_ratio));
  const Index n_train_val =
      static_cast<Index>(std::floor(nd * (train_ratio + val_ratio)));
  SplitIndices out;
  out.train.assign(perm.begin(), perm.begin() + n_train);
  out.val.assign(perm.begin() + n_train, perm.begin() + n_train_val);
  out.test.assign(perm.begin() + n_train_val, perm.end());
  return out;
}

namespace {

ordered_json graph_to_json(const HeteroGraph& g) {
  ordered_json j;
  ordered_json node_types = ordered_json::object();
  for (const auto& [name, count] : g.node_counts) node_types[name] = count;
  j["node_types"] = std::move(node_types);

  ordered_json edges = ordered_json::object();
  for (const auto& [name, et] : g.edge_lists) {
    ordered_json e;
    e["src_type"] = et.src_type;
    e["dst_type"] = et.dst_type;
    ordered_json pairs = ordered_json::array();
    for (auto [s, d] : et.pairs) pairs.push_back({s, d});
    e["pairs"] = std::move(pairs);
    edges[name] = std::move(e);
  }
  j["edges"] = std::move(edges);

  j["target_type"] = g.target_type;

  ordered_json features = ordered_json::array();
  for (Index r = 0; r < g.features.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Index c = 0; c < g.features.cols(); ++c) row.push_back(g.features(r, c));
    features.push_back(std::move(row));
  }
  j["features"] = std::move(features);

  j["labels"] = g.labels;
  j["splits"] = {{"train", g.train_idx}, {"val", g.val_idx}, {"test", g.test_idx}};
  j["meta_paths"] = g.meta_paths;
  return j;
}

HeteroGraph graph_from_json(const ordered_json& j) {
  HeteroGraph g;
  try {
    for (const auto& [name, count] : j.at("node_types").items())
      g.node_counts[name] = count.get<Index>();
    for (const auto& [name, e] : j.at("edges").items()) {
      EdgeTypeList et;
      et.src_type = e.at("src_type").get<std::string>();
      et.dst_type = e.at("dst_type").get<std::string>();
      for (const auto& p : e.at("pairs")) {
        if (!p.is_array() || p.size() != 2)
          throw ParseError("graph file: edge pair must be [src, dst]");
        et.pairs.emplace_back(p[0].get<Index>(), p[1].get<Index>());
      }
      g.edge_lists[name] = std::move(et);
    }
    g.target_type = j.at("target_type").get<std::string>();

    const auto& feats = j.at("features");
    const Index n = static_cast<Index>(feats.size());
    const Index f = n == 0 ? 0 : static_cast<Index>(feats[0].size());
    g.features = Matrix(n, f);
    for (Index r = 0; r < n; ++r) {
      if (static_cast<Index>(feats[r].size()) != f)
        throw ParseError("graph file: ragged feature rows");
      for (Index c = 0; c < f; ++c) g.features(r, c) = feats[r][c].get<double>();
    }

    g.labels = j.at("labels").get<std::vector<int>>();
    const auto& splits = j.at("splits");
    g.train_idx = splits.at("train").get<std::vector<Index>>();
    g.val_idx = splits.at("val").get<std::vector<Index>>();
    g.test_idx = splits.at("test").get<std::vector<Index>>();
    g.meta_paths = j.at("meta_paths").get<std::vector<MetaPath>>();
  } catch (const ordered_json::exception& e) {
    throw ParseError(std::string("graph file: ") + e.what());
  }
  return g;
}

}  // namespace

HeteroGraph load_heterograph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("graph file: cannot open " + path.string());
  ordered_json j;
  try {
    in >> j;
  } catch (const ordered_json::exception& e) {
    throw ParseError(std::string("graph file: ") + e.what());
  }
  HeteroGraph g = graph_from_json(j);
  g.validate();
  return g;
}

void save_heterograph(const HeteroGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("graph file: cannot write " + path.string());
  out << graph_to_json(g).dump(2) << '\n';
}

}  // namespace hgen
