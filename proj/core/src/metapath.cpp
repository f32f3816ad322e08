#include "hgen/metapath.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hgen/error.hpp"
#include "hgen/rng.hpp"

namespace hgen {

using ordered_json = nlohmann::ordered_json;

SparseBoolMatrix biadjacency(const HeteroGraph& g, const std::string& edge_type) {
  auto it = g.edge_lists.find(edge_type);
  if (it == g.edge_lists.end())
    throw ValidationError("biadjacency: unknown edge type '" + edge_type + "'");
  const EdgeTypeList& et = it->second;
  const Index rows = g.node_counts.at(et.src_type);
  const Index cols = g.node_counts.at(et.dst_type);
  return SparseBoolMatrix::from_pairs(rows, cols, et.pairs);
}

SparseRealMatrix normalized_operator(const SparseBoolMatrix& adjacency) {
  const Index n = adjacency.rows();
  if (n != adjacency.cols())
    throw ShapeError("normalized_operator: adjacency must be square");
  // D = degree of (A + I): the added self-loop counts on top of any
  // retained self-path, so a node with only a self-path has degree 2.
  // The operator pattern is adjacency union diagonal with values
  // 1/sqrt(D_r * D_c); isolated nodes get diagonal 1.
  std::vector<double> inv_sqrt_deg(static_cast<std::size_t>(n));
  for (Index r = 0; r < n; ++r) {
    const auto deg = static_cast<double>(adjacency.row(r).size()) + 1.0;
    inv_sqrt_deg[static_cast<std::size_t>(r)] = 1.0 / std::sqrt(deg);
  }
  std::vector<std::vector<std::pair<Index, double>>> rows(
      static_cast<std::size_t>(n));
  for (Index r = 0; r < n; ++r) {
    auto row = adjacency.row(r);
    auto& out = rows[static_cast<std::size_t>(r)];
    const double dr = inv_sqrt_deg[static_cast<std::size_t>(r)];
    bool diag_done = false;
    for (Index c : row) {
      if (!diag_done && c >= r) {
        if (c > r) out.emplace_back(r, dr * dr);
        diag_done = true;
      }
      out.emplace_back(c, dr * inv_sqrt_deg[static_cast<std::size_t>(c)]);
    }
    if (!diag_done) out.emplace_back(r, dr * dr);
  }
  return SparseRealMatrix::from_rows(n, n, rows);
}

MetaPathGraph compile_metapath(const HeteroGraph& g, const MetaPath& path) {
  if (path.empty()) throw ValidationError("compile_metapath: empty path");
  SparseBoolMatrix acc = biadjacency(g, path.front());
  for (std::size_t s = 1; s < path.size(); ++s) {
    SparseBoolMatrix step = biadjacency(g, path[s]);
    if (acc.cols() != step.rows())
      throw ShapeError("compile_metapath: dimension mismatch at step " +
                       std::to_string(s) + " (corrupted type metadata)");
    acc = acc.multiply(step);
  }
  const Index n = g.num_targets();
  if (acc.rows() != n || acc.cols() != n)
    throw ShapeError("compile_metapath: path does not map target nodes to target nodes");

  MetaPathGraph mpg;
  mpg.adjacency = std::move(acc);
  mpg.norm_operator = normalized_operator(mpg.adjacency);
  std::ostringstream name;
  for (std::size_t s = 0; s < path.size(); ++s) {
    if (s) name << '|';
    name << path[s];
  }
  mpg.path_name = name.str();
  return mpg;
}

MetaPathGraph drop_edges(const MetaPathGraph& mpg, double rate,
                         std::uint64_t seed) {
  if (rate < 0.0 || rate >= 1.0)
    throw ValidationError("drop_edges: rate must be in [0, 1)");
  const Index n = mpg.adjacency.rows();
  Rng rng(seed);
  std::vector<std::pair<Index, Index>> kept;
  // one coin per unordered pair (r < c), mirrored to preserve symmetry
  for (Index r = 0; r < n; ++r) {
    for (Index c : mpg.adjacency.row(r)) {
      if (c < r) continue;
      if (c == r) {
        kept.emplace_back(r, r);
        continue;
      }
      if (rate > 0.0 && rng.bernoulli(rate)) continue;
      kept.emplace_back(r, c);
      kept.emplace_back(c, r);
    }
  }
  MetaPathGraph out;
  out.adjacency = SparseBoolMatrix::from_pairs(n, n, kept);
  out.norm_operator = normalized_operator(out.adjacency);
  out.path_name = mpg.path_name;
  return out;
}

std::uint64_t file_content_hash(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("content hash: cannot open " + file.string());
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
  char buf[1 << 14];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  return h;
}

namespace {

ordered_json sparse_bool_to_json(const SparseBoolMatrix& m) {
  ordered_json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  ordered_json entries = ordered_json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c : m.row(r)) entries.push_back({r, c});
  j["entries"] = std::move(entries);
  return j;
}

SparseBoolMatrix sparse_bool_from_json(const ordered_json& j) {
  std::vector<std::pair<Index, Index>> pairs;
  for (const auto& e : j.at("entries"))
    pairs.emplace_back(e[0].get<Index>(), e[1].get<Index>());
  return SparseBoolMatrix::from_pairs(j.at("rows").get<Index>(),
                                      j.at("cols").get<Index>(), pairs);
}

}  // namespace

void save_metapath_cache(const MetaPathGraph& mpg,
                         const std::filesystem::path& graph_file,
                         const std::filesystem::path& cache_file) {
  ordered_json j;
  j["graph_hash"] = file_content_hash(graph_file);
  j["path_name"] = mpg.path_name;
  j["adjacency"] = sparse_bool_to_json(mpg.adjacency);
  ordered_json op;
  op["rows"] = mpg.norm_operator.rows();
  op["cols"] = mpg.norm_operator.cols();
  ordered_json entries = ordered_json::array();
  for (Index r = 0; r < mpg.norm_operator.rows(); ++r) {
    auto idx = mpg.norm_operator.row_indices(r);
    auto val = mpg.norm_operator.row_values(r);
    for (std::size_t p = 0; p < idx.size(); ++p)
      entries.push_back({r, idx[p], val[p]});
  }
  op["entries"] = std::move(entries);
  j["norm_operator"] = std::move(op);

  std::ofstream out(cache_file);
  if (!out) throw Error("metapath cache: cannot write " + cache_file.string());
  out << j.dump() << '\n';
}

MetaPathGraph load_metapath_cache(const std::filesystem::path& graph_file,
                                  const std::filesystem::path& cache_file) {
  std::ifstream in(cache_file);
  if (!in) throw ParseError("metapath cache: cannot open " + cache_file.string());
  ordered_json j;
  try {
    in >> j;
  } catch (const ordered_json::exception& e) {
    throw ParseError(std::string("metapath cache: ") + e.what());
  }
  try {
    if (j.at("graph_hash").get<std::uint64_t>() != file_content_hash(graph_file))
      throw ValidationError("metapath cache: stale cache (graph content changed)");
    MetaPathGraph mpg;
    mpg.path_name = j.at("path_name").get<std::string>();
    mpg.adjacency = sparse_bool_from_json(j.at("adjacency"));
    const auto& op = j.at("norm_operator");
    const Index rows = op.at("rows").get<Index>();
    const Index cols = op.at("cols").get<Index>();
    std::vector<std::vector<std::pair<Index, double>>> row_entries(
        static_cast<std::size_t>(rows));
    for (const auto& e : op.at("entries"))
      row_entries[e[0].get<std::size_t>()].emplace_back(e[1].get<Index>(),
                                                        e[2].get<double>());
    mpg.norm_operator = SparseRealMatrix::from_rows(rows, cols, row_entries);
    return mpg;
  } catch (const ordered_json::exception& e) {
    throw ParseError(std::string("metapath cache: ") + e.what());
  }
}

}  // namespace hgen
