#include "hgen/matrix.hpp"

#include <cmath>

namespace hgen {

Matrix Matrix::of(
    std::initializer_list<std::initializer_list<double>> rows) {
  Index r = static_cast<Index>(rows.size());
  Index c = r == 0 ? 0 : static_cast<Index>(rows.begin()->size());
  Matrix m(r, c);
  Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Index>(row.size()) != c)
      throw ShapeError("matrix: ragged initializer");
    Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix Matrix::identity(Index n) {
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (Index r = 0; r < rows_; ++r)
    for (Index c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

void Matrix::add_scaled(const Matrix& other, double alpha) {
  if (!same_shape(other)) throw ShapeError("matrix: add_scaled shape mismatch");
  const double* src = other.data();
  double* dst = data();
  for (Index i = 0, n = size(); i < n; ++i) dst[i] += alpha * src[i];
}

namespace dense {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  const Index n = a.rows(), k = a.cols(), m = b.cols();
  for (Index i = 0; i < n; ++i) {
    const double* arow = a.data() + i * k;
    double* orow = out.data() + i * m;
    for (Index p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b.data() + p * m;
      for (Index j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ShapeError("matmul_at_b: row counts differ");
  Matrix out(a.cols(), b.cols());
  const Index n = a.rows(), k = a.cols(), m = b.cols();
  for (Index i = 0; i < n; ++i) {
    const double* arow = a.data() + i * k;
    const double* brow = b.data() + i * m;
    for (Index p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      double* orow = out.data() + p * m;
      for (Index j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ShapeError("matmul_a_bt: col counts differ");
  Matrix out(a.rows(), b.rows());
  const Index n = a.rows(), k = a.cols(), m = b.rows();
  for (Index i = 0; i < n; ++i) {
    const double* arow = a.data() + i * k;
    double* orow = out.data() + i * m;
    for (Index j = 0; j < m; ++j) {
      const double* brow = b.data() + j * k;
      double acc = 0.0;
      for (Index p = 0; p < k; ++p) acc += arow[p] * brow[p];
      orow[j] = acc;
    }
  }
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw ShapeError("hadamard: shape mismatch");
  Matrix out(a.rows(), a.cols());
  for (Index i = 0, n = a.size(); i < n; ++i)
    out.data()[i] = a.data()[i] * b.data()[i];
  return out;
}

Matrix scaled(const Matrix& a, double c) {
  Matrix out(a.rows(), a.cols());
  for (Index i = 0, n = a.size(); i < n; ++i) out.data()[i] = c * a.data()[i];
  return out;
}

Matrix col_sums(const Matrix& a) {
  Matrix out(1, a.cols());
  for (Index r = 0; r < a.rows(); ++r)
    for (Index c = 0; c < a.cols(); ++c) out(0, c) += a(r, c);
  return out;
}

Matrix row_sums(const Matrix& a) {
  Matrix out(a.rows(), 1);
  for (Index r = 0; r < a.rows(); ++r)
    for (Index c = 0; c < a.cols(); ++c) out(r, 0) += a(r, c);
  return out;
}

}  // namespace dense

}  // namespace hgen
