#pragma once

// Independent oracle: exists-path semantics by direct layered enumeration
// over typed edges. Deliberately naive; never touches the sparse product
// code it checks.

#include <vector>

#include "hgen/hetero_graph.hpp"
#include "hgen/sparse.hpp"

namespace hgen::testing {

inline SparseBoolMatrix brute_force_metapath(const HeteroGraph& g,
                                             const MetaPath& path) {
  // adjacency list per step
  std::vector<std::vector<std::vector<Index>>> step_adj;
  std::vector<Index> step_dst_count;
  for (const std::string& name : path) {
    const EdgeTypeList& et = g.edge_lists.at(name);
    const Index src_n = g.node_counts.at(et.src_type);
    std::vector<std::vector<Index>> adj(static_cast<std::size_t>(src_n));
    for (auto [s, d] : et.pairs) adj[static_cast<std::size_t>(s)].push_back(d);
    step_adj.push_back(std::move(adj));
    step_dst_count.push_back(g.node_counts.at(et.dst_type));
  }

  const Index n = g.num_targets();
  std::vector<std::pair<Index, Index>> hits;
  for (Index start = 0; start < n; ++start) {
    std::vector<Index> frontier{start};
    for (std::size_t s = 0; s < path.size(); ++s) {
      std::vector<char> seen(static_cast<std::size_t>(step_dst_count[s]), 0);
      std::vector<Index> next;
      for (Index u : frontier)
        for (Index v : step_adj[s][static_cast<std::size_t>(u)])
          if (!seen[static_cast<std::size_t>(v)]) {
            seen[static_cast<std::size_t>(v)] = 1;
            next.push_back(v);
          }
      frontier = std::move(next);
      if (frontier.empty()) break;
    }
    for (Index v : frontier) hits.emplace_back(start, v);
  }
  return SparseBoolMatrix::from_pairs(n, n, hits);
}

}  // namespace hgen::testing
