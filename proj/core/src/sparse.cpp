#include "hgen/sparse.hpp"

#include <algorithm>

namespace hgen {

SparseBoolMatrix SparseBoolMatrix::from_pairs(
    Index rows, Index cols, const std::vector<std::pair<Index, Index>>& pairs) {
  SparseBoolMatrix m(rows, cols);
  for (auto [r, c] : pairs) {
    if (r < 0 || r >= rows || c < 0 || c >= cols)
      throw ShapeError("sparse: entry out of range");
  }
  auto sorted = pairs;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  m.col_idx_.reserve(sorted.size());
  for (auto [r, c] : sorted) {
    ++m.row_ptr_[r + 1];
    m.col_idx_.push_back(c);
  }
  for (Index r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

bool SparseBoolMatrix::contains(Index r, Index c) const {
  auto cols = row(r);
  return std::binary_search(cols.begin(), cols.end(), c);
}

SparseBoolMatrix SparseBoolMatrix::multiply(const SparseBoolMatrix& other) const {
  if (cols_ != other.rows_)
    throw ShapeError("sparse multiply: inner dimensions differ");
  SparseBoolMatrix out(rows_, other.cols_);
  std::vector<char> mark(static_cast<std::size_t>(other.cols_), 0);
  std::vector<Index> hits;
  for (Index r = 0; r < rows_; ++r) {
    hits.clear();
    for (Index mid : row(r)) {
      for (Index c : other.row(mid)) {
        if (!mark[c]) {
          mark[c] = 1;
          hits.push_back(c);
        }
      }
    }
    std::sort(hits.begin(), hits.end());
    out.row_ptr_[r + 1] = out.row_ptr_[r] + static_cast<Index>(hits.size());
    out.col_idx_.insert(out.col_idx_.end(), hits.begin(), hits.end());
    for (Index c : hits) mark[c] = 0;
  }
  return out;
}

SparseBoolMatrix SparseBoolMatrix::transposed() const {
  std::vector<std::pair<Index, Index>> pairs;
  pairs.reserve(col_idx_.size());
  for (Index r = 0; r < rows_; ++r)
    for (Index c : row(r)) pairs.emplace_back(c, r);
  return from_pairs(cols_, rows_, pairs);
}

Matrix SparseBoolMatrix::to_dense() const {
  Matrix d(rows_, cols_);
  for (Index r = 0; r < rows_; ++r)
    for (Index c : row(r)) d(r, c) = 1.0;
  return d;
}

SparseRealMatrix SparseRealMatrix::from_rows(
    Index rows, Index cols,
    const std::vector<std::vector<std::pair<Index, double>>>& row_entries) {
  SparseRealMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.row_ptr_.assign(rows + 1, 0);
  for (Index r = 0; r < rows; ++r) {
    Index prev = -1;
    for (auto [c, v] : row_entries[r]) {
      if (c <= prev || c >= cols)
        throw ShapeError("sparse: row entries not sorted/unique/in-range");
      prev = c;
      m.col_idx_.push_back(c);
      m.values_.push_back(v);
    }
    m.row_ptr_[r + 1] = static_cast<Index>(m.col_idx_.size());
  }
  return m;
}

Matrix SparseRealMatrix::multiply_dense(const Matrix& d) const {
  if (cols_ != d.rows())
    throw ShapeError("sparse_dense_matmul: inner dimensions differ");
  Matrix out(rows_, d.cols());
  const Index h = d.cols();
  for (Index r = 0; r < rows_; ++r) {
    double* orow = out.data() + r * h;
    auto idx = row_indices(r);
    auto val = row_values(r);
    for (std::size_t p = 0; p < idx.size(); ++p) {
      const double* drow = d.data() + idx[p] * h;
      const double v = val[p];
      for (Index j = 0; j < h; ++j) orow[j] += v * drow[j];
    }
  }
  return out;
}

Matrix SparseRealMatrix::multiply_dense_transposed(const Matrix& d) const {
  if (rows_ != d.rows())
    throw ShapeError("sparse_dense_matmul backward: shape mismatch");
  Matrix out(cols_, d.cols());
  const Index h = d.cols();
  for (Index r = 0; r < rows_; ++r) {
    const double* drow = d.data() + r * h;
    auto idx = row_indices(r);
    auto val = row_values(r);
    for (std::size_t p = 0; p < idx.size(); ++p) {
      double* orow = out.data() + idx[p] * h;
      const double v = val[p];
      for (Index j = 0; j < h; ++j) orow[j] += v * drow[j];
    }
  }
  return out;
}

Matrix SparseRealMatrix::to_dense() const {
  Matrix d(rows_, cols_);
  for (Index r = 0; r < rows_; ++r) {
    auto idx = row_indices(r);
    auto val = row_values(r);
    for (std::size_t p = 0; p < idx.size(); ++p) d(r, idx[p]) = val[p];
  }
  return d;
}

}  // namespace hgen
