#pragma once

#include <filesystem>
#include <string>

#include "hgen/hetero_graph.hpp"
#include "hgen/sparse.hpp"

namespace hgen {

/// A compiled meta-path: binarized homogeneous adjacency over target nodes
/// plus the symmetric-normalized propagation operator
/// D^{-1/2}(A+I)D^{-1/2} with D the degree matrix of (A+I). Immutable and
/// shareable; compilation of distinct meta-paths is independent.
struct MetaPathGraph {
  SparseBoolMatrix adjacency;     // n x n, self-paths retained
  SparseRealMatrix norm_operator; // full diagonal, all values > 0
  std::string path_name;

  bool operator==(const MetaPathGraph& o) const = default;
};

/// Biadjacency of one edge type: (count(src_type) x count(dst_type)),
/// entry (s, d) set iff the edge is present; duplicates collapse.
SparseBoolMatrix biadjacency(const HeteroGraph& g, const std::string& edge_type);

/// Chains the biadjacency factors left-to-right under the boolean semiring
/// (exists-path, not path counts) and binarizes; then derives the
/// normalized operator. Isolated nodes get operator diagonal 1 via the
/// self-loop.
MetaPathGraph compile_metapath(const HeteroGraph& g, const MetaPath& path);

/// Recomputes the normalized operator for an adjacency (exposed for edge
/// dropping and tests).
SparseRealMatrix normalized_operator(const SparseBoolMatrix& adjacency);

/// Removes each off-diagonal symmetric entry pair with probability `rate`
/// (one coin per unordered pair, preserving symmetry); diagonal kept;
/// operator recomputed. Deterministic given seed.
MetaPathGraph drop_edges(const MetaPathGraph& mpg, double rate,
                         std::uint64_t seed);

/// Cache: a compiled MetaPathGraph serialized next to its source graph
/// with a content hash over the graph file bytes and the path. Loading
/// verifies the hash; a stale or foreign cache is rejected. Round trip is
/// bit-exact.
void save_metapath_cache(const MetaPathGraph& mpg,
                         const std::filesystem::path& graph_file,
                         const std::filesystem::path& cache_file);
MetaPathGraph load_metapath_cache(const std::filesystem::path& graph_file,
                                  const std::filesystem::path& cache_file);

/// FNV-1a over file bytes; the cache-freshness fingerprint.
std::uint64_t file_content_hash(const std::filesystem::path& file);

}  // namespace hgen
