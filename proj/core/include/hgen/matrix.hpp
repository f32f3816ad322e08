#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "hgen/error.hpp"

namespace hgen {

using Index = std::int64_t;

/// Dense row-major matrix of doubles. Plain value type; all learnable
/// computation goes through Tensor/Tape, which wrap this.
class Matrix {
 public:
  Matrix() = default;
  Matrix(Index rows, Index cols, double fill = 0.0)
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows * cols), fill) {
    if (rows < 0 || cols < 0) throw ShapeError("matrix: negative dimension");
  }

  /// Builds from nested brace lists: Matrix::of({{1, 2}, {3, 4}}).
  static Matrix of(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(Index n);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index size() const { return rows_ * cols_; }

  double& operator()(Index r, Index c) { return data_[idx(r, c)]; }
  double operator()(Index r, Index c) const { return data_[idx(r, c)]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  bool all_finite() const;

  Matrix transposed() const;

  /// In-place axpy: *this += alpha * other. Shapes must match.
  void add_scaled(const Matrix& other, double alpha = 1.0);

 private:
  std::size_t idx(Index r, Index c) const {
    return static_cast<std::size_t>(r * cols_ + c);
  }

  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> data_;
};

namespace dense {

// Raw kernels shared by forward ops and their backward closures.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_at_b(const Matrix& a, const Matrix& b);  // a^T * b
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);  // a * b^T
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scaled(const Matrix& a, double c);
Matrix col_sums(const Matrix& a);  // 1 x cols
Matrix row_sums(const Matrix& a);  // rows x 1

}  // namespace dense

}  // namespace hgen
