#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "hgen/matrix.hpp"

namespace hgen {

/// Row-compressed boolean matrix. Column indices are sorted and
/// duplicate-free within each row.
class SparseBoolMatrix {
 public:
  SparseBoolMatrix() = default;
  SparseBoolMatrix(Index rows, Index cols)
      : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  /// Builds from (row, col) pairs; duplicates collapse to one entry.
  static SparseBoolMatrix from_pairs(
      Index rows, Index cols, const std::vector<std::pair<Index, Index>>& pairs);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index nnz() const { return static_cast<Index>(col_idx_.size()); }

  std::span<const Index> row(Index r) const {
    return {col_idx_.data() + row_ptr_[r],
            static_cast<std::size_t>(row_ptr_[r + 1] - row_ptr_[r])};
  }

  bool contains(Index r, Index c) const;

  /// Boolean-semiring product (exists-path semantics).
  SparseBoolMatrix multiply(const SparseBoolMatrix& other) const;

  SparseBoolMatrix transposed() const;

  Matrix to_dense() const;

  bool operator==(const SparseBoolMatrix& o) const = default;

 private:
  friend class SparseBoolBuilder;
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> row_ptr_;
  std::vector<Index> col_idx_;
};

/// Row-compressed real matrix (CSR). Structure rules as above.
class SparseRealMatrix {
 public:
  SparseRealMatrix() = default;

  /// Entries of each row must arrive sorted by column.
  static SparseRealMatrix from_rows(
      Index rows, Index cols,
      const std::vector<std::vector<std::pair<Index, double>>>& row_entries);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index nnz() const { return static_cast<Index>(col_idx_.size()); }

  std::span<const Index> row_indices(Index r) const {
    return {col_idx_.data() + row_ptr_[r],
            static_cast<std::size_t>(row_ptr_[r + 1] - row_ptr_[r])};
  }
  std::span<const double> row_values(Index r) const {
    return {values_.data() + row_ptr_[r],
            static_cast<std::size_t>(row_ptr_[r + 1] - row_ptr_[r])};
  }

  /// out = this * d  (dense right operand).
  Matrix multiply_dense(const Matrix& d) const;

  /// out = this^T * d; used by backward passes.
  Matrix multiply_dense_transposed(const Matrix& d) const;

  Matrix to_dense() const;

  bool operator==(const SparseRealMatrix& o) const = default;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> row_ptr_;
  std::vector<Index> col_idx_;
  std::vector<double> values_;
};

}  // namespace hgen
