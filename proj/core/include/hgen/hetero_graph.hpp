#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hgen/matrix.hpp"
#include "hgen/rng.hpp"

namespace hgen {

struct EdgeTypeList {
  std::string src_type;
  std::string dst_type;
  std::vector<std::pair<Index, Index>> pairs;
};

using MetaPath = std::vector<std::string>;  // sequence of edge-type names

/// Typed node/edge store over the target-type feature and label space.
/// Immutable after construction (validate() freezes intent); safe to share
/// across workers. Edges are directed per edge type; the reverse of a
/// relation "A-B" is a separately declared type "B-A".
struct HeteroGraph {
  std::map<std::string, Index> node_counts;
  std::map<std::string, EdgeTypeList> edge_lists;
  std::string target_type;
  Matrix features;           // n x f, target-type nodes
  std::vector<int> labels;   // length n, classes in [0, q)
  std::vector<Index> train_idx;
  std::vector<Index> val_idx;
  std::vector<Index> test_idx;
  std::vector<MetaPath> meta_paths;

  Index num_targets() const;
  int num_classes() const;  // max label + 1, at least 1

  /// Throws ValidationError naming the violated invariant.
  void validate() const;
};

/// Planted-partition generator spec. Each auxiliary type yields the edge
/// type pair "<target>-<aux>" / "<aux>-<target>" (mutually reversed) and
/// the two-step meta-path through it. Auxiliary nodes carry a latent class
/// so every declared meta-path has class signal.
struct SyntheticAuxType {
  std::string name;
  Index count = 1;
  double p_intra = 0.1;  // connection prob. when classes match
  double p_inter = 0.01;
};

struct SyntheticSpec {
  Index num_target_nodes = 60;
  int num_classes = 2;
  std::vector<std::vector<double>> class_centers;  // q x f
  double noise_scale = 1.0;
  std::string target_type = "target";
  std::vector<SyntheticAuxType> aux_types;
  double train_ratio = 0.6;
  double val_ratio = 0.2;
  double test_ratio = 0.2;
  std::uint64_t seed = 0;

  /// q x f centers with center[c][d] = scale when d % q == c, else 0.
  static std::vector<std::vector<double>> default_centers(int q, Index f,
                                                          double scale);

  void validate() const;
};

HeteroGraph generate_synthetic(const SyntheticSpec& spec);

/// Disjoint shuffled partition of 0..n-1 with cumulative-floor sizing;
/// ratios must sum to 1 within 1e-9.
struct SplitIndices {
  std::vector<Index> train;
  std::vector<Index> val;
  std::vector<Index> test;
};
SplitIndices split_nodes(Index n, double train_ratio, double val_ratio,
                         double test_ratio, std::uint64_t seed);

HeteroGraph load_heterograph(const std::filesystem::path& path);
void save_heterograph(const HeteroGraph& g, const std::filesystem::path& path);

}  // namespace hgen
