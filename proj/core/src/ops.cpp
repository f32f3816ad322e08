#include "hgen/ops.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "hgen/error.hpp"

namespace hgen {

namespace {

Tape* resolve_tape(std::initializer_list<const Tensor*> inputs) {
  Tape* tape = nullptr;
  for (const Tensor* t : inputs) {
    if (!t->has_node()) continue;
    if (tape == nullptr) {
      tape = t->tape();
    } else if (tape != t->tape()) {
      throw Error("ops: inputs belong to different tapes");
    }
  }
  return tape;
}

int node_or_minus_one(const Tensor& t) { return t.has_node() ? t.node() : -1; }

// numpy-style expansion lookup for a (possibly smaller) operand
inline double bval(const Matrix& m, Index r, Index c) {
  return m(m.rows() == 1 ? 0 : r, m.cols() == 1 ? 0 : c);
}

bool axis_compatible(Index big, Index small) {
  return small == big || small == 1;
}

void check_broadcast(const Matrix& a, const Matrix& b, const char* op) {
  Index rows = std::max(a.rows(), b.rows());
  Index cols = std::max(a.cols(), b.cols());
  if (!axis_compatible(rows, a.rows()) || !axis_compatible(cols, a.cols()) ||
      !axis_compatible(rows, b.rows()) || !axis_compatible(cols, b.cols()))
    throw ShapeError(std::string(op) + ": incompatible shapes");
}

// Sums g over the axes that were broadcast to reach g's shape.
Matrix reduce_to_shape(const Matrix& g, Index rows, Index cols) {
  if (g.rows() == rows && g.cols() == cols) return g;
  Matrix out(rows, cols);
  for (Index r = 0; r < g.rows(); ++r)
    for (Index c = 0; c < g.cols(); ++c)
      out(rows == 1 ? 0 : r, cols == 1 ? 0 : c) += g(r, c);
  return out;
}

enum class EwKind { Add, Sub, Mul };

Tensor elementwise(const Tensor& a, const Tensor& b, EwKind kind,
                   const char* name) {
  check_broadcast(a.value(), b.value(), name);
  const Index rows = std::max(a.rows(), b.rows());
  const Index cols = std::max(a.cols(), b.cols());
  Matrix out(rows, cols);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      double x = bval(av, r, c), y = bval(bv, r, c);
      out(r, c) = kind == EwKind::Add   ? x + y
                  : kind == EwKind::Sub ? x - y
                                        : x * y;
    }

  Tape* tape = resolve_tape({&a, &b});
  if (!tape) return Tensor(std::move(out));

  int na = node_or_minus_one(a), nb = node_or_minus_one(b);
  auto sa = a.shared_value(), sb = b.shared_value();
  return tape->record(
      std::move(out), [=](Tape& t, const Matrix& g) {
        switch (kind) {
          case EwKind::Add:
            if (na >= 0) t.accumulate(na, reduce_to_shape(g, sa->rows(), sa->cols()));
            if (nb >= 0) t.accumulate(nb, reduce_to_shape(g, sb->rows(), sb->cols()));
            break;
          case EwKind::Sub:
            if (na >= 0) t.accumulate(na, reduce_to_shape(g, sa->rows(), sa->cols()));
            if (nb >= 0)
              t.accumulate(nb, dense::scaled(
                                   reduce_to_shape(g, sb->rows(), sb->cols()), -1.0));
            break;
          case EwKind::Mul: {
            if (na >= 0) {
              Matrix ga(g.rows(), g.cols());
              for (Index r = 0; r < g.rows(); ++r)
                for (Index c = 0; c < g.cols(); ++c)
                  ga(r, c) = g(r, c) * bval(*sb, r, c);
              t.accumulate(na, reduce_to_shape(ga, sa->rows(), sa->cols()));
            }
            if (nb >= 0) {
              Matrix gb(g.rows(), g.cols());
              for (Index r = 0; r < g.rows(); ++r)
                for (Index c = 0; c < g.cols(); ++c)
                  gb(r, c) = g(r, c) * bval(*sa, r, c);
              t.accumulate(nb, reduce_to_shape(gb, sb->rows(), sb->cols()));
            }
            break;
          }
        }
      });
}

// Unary elementwise with pointwise derivative; `kink_at_zero` reports the
// sign pattern and |x| to the active monitor for FD kink detection.
template <typename F, typename DF>
Tensor unary_pointwise(const Tensor& a, F f, DF df, bool kink_at_zero) {
  const Matrix& av = a.value();
  Matrix out(av.rows(), av.cols());
  KinkMonitor* mon = kink_at_zero ? KinkMonitor::active() : nullptr;
  for (Index i = 0, n = av.size(); i < n; ++i) {
    double x = av.data()[i];
    out.data()[i] = f(x);
    if (mon) {
      mon->note_branch(x > 0.0 ? 1 : 0);
      mon->note_kink_distance(std::abs(x));
    }
  }
  Tape* tape = resolve_tape({&a});
  if (!tape) return Tensor(std::move(out));
  auto sa = a.shared_value();
  int na = a.node();
  return tape->record(std::move(out), [=](Tape& t, const Matrix& g) {
    Matrix ga(g.rows(), g.cols());
    for (Index i = 0, n = g.size(); i < n; ++i)
      ga.data()[i] = g.data()[i] * df(sa->data()[i]);
    t.accumulate(na, std::move(ga));
  });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  Matrix out = dense::matmul(a.value(), b.value());
  Tape* tape = resolve_tape({&a, &b});
  if (!tape) return Tensor(std::move(out));
  int na = node_or_minus_one(a), nb = node_or_minus_one(b);
  auto sa = a.shared_value(), sb = b.shared_value();
  return tape->record(std::move(out), [=](Tape& t, const Matrix& g) {
    if (na >= 0) t.accumulate(na, dense::matmul_a_bt(g, *sb));
    if (nb >= 0) t.accumulate(nb, dense::matmul_at_b(*sa, g));
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  return elementwise(a, b, EwKind::Add, "add");
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return elementwise(a, b, EwKind::Sub, "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return elementwise(a, b, EwKind::Mul, "mul");
}

Tensor scale(const Tensor& a, double c) {
  Matrix out = dense::scaled(a.value(), c);
  Tape* tape = resolve_tape({&a});
  if (!tape) return Tensor(std::move(out));
  int na = a.node();
  return tape->record(std::move(out), [=](Tape& t, const Matrix& g) {
    t.accumulate(na, dense::scaled(g, c));
  });
}

Tensor add_scalar(const Tensor& a, double c) {
  const Matrix& av = a.value();
  Matrix out(av.rows(), av.cols());
  for (Index i = 0, n = av.size(); i < n; ++i) out.data()[i] = av.data()[i] + c;
  Tape* tape = resolve_tape({&a});
  if (!tape) return Tensor(std::move(out));
  int na = a.node();
  return tape->record(std::move(out), [=](Tape& t, const Matrix& g) {
    t.accumulate(na, g);
  });
}

Tensor relu(const Tensor& a) {
  return unary_pointwise(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x) { return x > 0.0 ? 1.0 : 0.0; }, true);
}

Tensor leaky_relu(const Tensor& a, double slope) {
  return unary_pointwise(
      a, [slope](double x) { return x > 0.0 ? x : slope * x; },
      [slope](double x) { return x > 0.0 ? 1.0 : slope; }, true);
}

Tensor elu(const Tensor& a) {
  // C1 at 0 (negative-side slope exp(0) = 1), so no kink to monitor.
  return unary_pointwise(
      a, [](double x) { return x > 0.0 ? x : std::expm1(x); },
      [](double x) { return x > 0.0 ? 1.0 : std::exp(x); }, false);
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const Index rows = parts.front().rows();
  Index cols = 0;
  for (const Tensor& p : parts) {
    if (p.rows() != rows) throw ShapeError("concat_cols: row count mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Index off = 0;
  for (const Tensor& p : parts) {
    const Matrix& pv = p.value();
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < pv.cols(); ++c) out(r, off + c) = pv(r, c);
    off += pv.cols();
  }

  Tape* tape = nullptr;
  for (const Tensor& p : parts)
    if (p.has_node()) {
      if (tape && tape != p.tape())
        throw Error("ops: inputs belong to different tapes");
      tape = p.tape();
    }
  if (!tape) return Tensor(std::move(out));

  struct Block {
    int node;
    Index off;
    Index cols;
  };
  std::vector<Block> blocks;
  off = 0;
  for (const Tensor& p : parts) {
    if (p.has_node()) blocks.push_back({p.node(), off, p.cols()});
    off += p.cols();
  }
  return tape->record(std::move(out), [=](Tape& t, const Matrix& g) {
    for (const Block& b : blocks) {
      Matrix gp(g.rows(), b.cols);
      for (Index r = 0; r < g.rows(); ++r)
        for (Index c = 0; c < b.cols; ++c) gp(r, c) = g(r, b.off + c);
      t.accumulate(b.node, std::move(gp));
    }
  });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const Index cols = parts.front().cols();
  Index rows = 0;
  for (const Tensor& p : parts) {
    if (p.cols() != cols) throw ShapeError("concat_rows: col count mismatch");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  Index off = 0;
  for (const Tensor& p : parts) {
    const Matrix& pv = p.value();
    for (Index r = 0; r < pv.rows(); ++r)
      for (Index c = 0; c < cols; ++c) out(off + r, c) = pv(r, c);
    off += pv.rows();
  }

  Tape* tape = nullptr;
  for (const Tensor& p : parts)
    if (p.has_node()) {
      if (tape && tape != p.tape())
        throw Error("ops: inputs belong to different tapes");
      tape = p.tape();
    }
  if (!tape) return Tensor(std::move(out));

  struct Block {
    int node;
    Index off;
    Index rows;
  };
  std::vector<Block> blocks;
  off = 0;
  for (const Tensor& p : parts) {
    if (p.has_node()) blocks.push_back({p.node(), off, p.rows()});
    off += p.rows();
  }
  return tape->record(std::move(out), [=](Tape& t, const Matrix& g) {
    for (const Block& b : blocks) {
      Matrix gp(b.rows, g.cols());
      for (Index r = 0; r < b.rows; ++r)
        for (Index c = 0; c < g.cols(); ++c) gp(r, c) = g(b.off + r, c);
      t.accumulate(b.node, std::move(gp));
    }
  });
}

Tensor transpose(const Tensor& a) {
  Matrix out = a.value().transposed();
  Tape* tape = resolve_tape({&a});
  if (!tape) return Tensor(std::move(out));
  int na = a.node();
  return tape->record(std::move(out), [=](Tape& t, const Matrix& g) {
    t.accumulate(na, g.transposed());
  });
}

Tensor slice_cols(const Tensor& a, Index first, Index count) {
  if (first < 0 || count < 0 || first + count > a.cols())
    throw ShapeError("slice_cols: range out of bounds");
  const Matrix& av = a.value();
  Matrix out(av.rows(), count);
  for (Index r = 0; r < av.rows(); ++r)
    for (Index c = 0; c < count; ++c) out(r, c) = av(r, first + c);
  Tape* tape = resolve_tape({&a});
  if (!tape) return Tensor(std::move(out));
  int na = a.node();
  Index rows = av.rows(), cols = av.cols();
  return tape->record(std::move(out), [=](Tape& t, const Matrix& g) {
    Matrix ga(rows, cols);
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < count; ++c) ga(r, first + c) = g(r, c);
    t.accumulate(na, std::move(ga));
  });
}

Tensor row_mean(const Tensor& a) {
  if (a.cols() < 1) throw ShapeError("row_mean: need at least one column");
  const Matrix& av = a.value();
  Matrix out = dense::row_sums(av);
  const double inv = 1.0 / static_cast<double>(av.cols());
  for (Index r = 0; r < out.rows(); ++r) out(r, 0) *= inv;
  Tape* tape = resolve_tape({&a});
  if (!tape) return Tensor(std::move(out));
  int na = a.node();
  Index rows = av.rows(), cols = av.cols();
  return tape->record(std::move(out), [=](Tape& t, const Matrix& g) {
    Matrix ga(rows, cols);
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) ga(r, c) = g(r, 0) * inv;
    t.accumulate(na, std::move(ga));
  });
}

namespace {

Tensor row_extreme(const Tensor& a, bool take_max) {
  if (a.cols() < 1) throw ShapeError("row_min/row_max: need at least one column");
  const Matrix& av = a.value();
  const Index rows = av.rows(), cols = av.cols();
  Matrix out(rows, 1);
  std::vector<Index> arg(static_cast<std::size_t>(rows));
  KinkMonitor* mon = KinkMonitor::active();
  for (Index r = 0; r < rows; ++r) {
    Index best_i = 0;
    double best = av(r, 0);
    double second = std::numeric_limits<double>::infinity();
    for (Index c = 1; c < cols; ++c) {
      double x = av(r, c);
      bool better = take_max ? (x > best) : (x < best);
      if (better) {
        second = std::abs(best - x);
        best = x;
        best_i = c;
      } else {
        second = std::min(second, std::abs(x - best));
      }
    }
    out(r, 0) = best;
    arg[static_cast<std::size_t>(r)] = best_i;
    if (mon) {
      mon->note_branch(static_cast<std::uint64_t>(best_i));
      if (cols > 1) mon->note_kink_distance(second);
    }
  }
  Tape* tape = resolve_tape({&a});
  if (!tape) return Tensor(std::move(out));
  int na = a.node();
  return tape->record(std::move(out), [=, arg = std::move(arg)](
                                          Tape& t, const Matrix& g) {
    Matrix ga(rows, cols);
    for (Index r = 0; r < rows; ++r)
      ga(r, arg[static_cast<std::size_t>(r)]) = g(r, 0);
    t.accumulate(na, std::move(ga));
  });
}

}  // namespace

Tensor row_min(const Tensor& a) { return row_extreme(a, false); }
Tensor row_max(const Tensor& a) { return row_extreme(a, true); }

Tensor row_minmax_normalize(const Tensor& a) {
  constexpr double kDegenerate = 1e-12;
  const Matrix& av = a.value();
  const Index rows = av.rows(), cols = av.cols();
  Matrix out(rows, cols);
  std::vector<Index> imin(static_cast<std::size_t>(rows));
  std::vector<Index> imax(static_cast<std::size_t>(rows));
  std::vector<double> inv_d(static_cast<std::size_t>(rows), 0.0);
  KinkMonitor* mon = KinkMonitor::active();
  for (Index r = 0; r < rows; ++r) {
    Index lo = 0, hi = 0;
    for (Index c = 1; c < cols; ++c) {
      if (av(r, c) < av(r, lo)) lo = c;
      if (av(r, c) > av(r, hi)) hi = c;
    }
    imin[static_cast<std::size_t>(r)] = lo;
    imax[static_cast<std::size_t>(r)] = hi;
    const double d = av(r, hi) - av(r, lo);
    if (mon) {
      mon->note_branch(static_cast<std::uint64_t>(lo));
      mon->note_branch(static_cast<std::uint64_t>(hi));
      mon->note_branch(d <= kDegenerate ? 1 : 0);
      // nearest tie against either extreme
      for (Index c = 0; c < cols; ++c) {
        if (c != lo) mon->note_kink_distance(av(r, c) - av(r, lo));
        if (c != hi) mon->note_kink_distance(av(r, hi) - av(r, c));
      }
    }
    if (d <= kDegenerate) continue;  // row stays zero, passes no gradient
    const double inv = 1.0 / d;
    inv_d[static_cast<std::size_t>(r)] = inv;
    for (Index c = 0; c < cols; ++c) out(r, c) = (av(r, c) - av(r, lo)) * inv;
  }
  Tape* tape = resolve_tape({&a});
  if (!tape) return Tensor(std::move(out));
  int na = a.node();
  auto sout = std::make_shared<Matrix>(out);  // needed by backward
  return tape->record(
      std::move(out),
      [=, imin = std::move(imin), imax = std::move(imax),
       inv_d = std::move(inv_d)](Tape& t, const Matrix& g) {
        Matrix ga(rows, cols);
        for (Index r = 0; r < rows; ++r) {
          const double inv = inv_d[static_cast<std::size_t>(r)];
          if (inv == 0.0) continue;
          const Index lo = imin[static_cast<std::size_t>(r)];
          const Index hi = imax[static_cast<std::size_t>(r)];
          double gsum = 0.0, gdot = 0.0;
          for (Index c = 0; c < cols; ++c) {
            gsum += g(r, c);
            gdot += g(r, c) * (*sout)(r, c);
          }
          for (Index c = 0; c < cols; ++c) ga(r, c) += g(r, c) * inv;
          ga(r, lo) -= gsum * inv;
          ga(r, hi) -= gdot * inv;
          ga(r, lo) += gdot * inv;
        }
        t.accumulate(na, std::move(ga));
      });
}

Tensor sum_all(const Tensor& a) {
  const Matrix& av = a.value();
  double s = 0.0;
  for (Index i = 0, n = av.size(); i < n; ++i) s += av.data()[i];
  Matrix out(1, 1, s);
  Tape* tape = resolve_tape({&a});
  if (!tape) return Tensor(std::move(out));
  int na = a.node();
  Index rows = av.rows(), cols = av.cols();
  return tape->record(std::move(out), [=](Tape& t, const Matrix& g) {
    t.accumulate(na, Matrix(rows, cols, g(0, 0)));
  });
}

Tensor dropout_mask(Index rows, Index cols, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0)
    throw ValidationError("dropout_mask: rate must be in [0, 1)");
  if (rate == 0.0) return Tensor(Matrix(rows, cols, 1.0));
  Matrix out(rows, cols);
  const double keep = 1.0 / (1.0 - rate);
  for (Index i = 0, n = rows * cols; i < n; ++i)
    out.data()[i] = rng.uniform() < rate ? 0.0 : keep;
  return Tensor(std::move(out));
}

Tensor softmax_cross_entropy(const Tensor& logits,
                             const std::vector<int>& labels,
                             const std::vector<Index>& subset) {
  if (subset.empty())
    throw ValidationError("softmax_cross_entropy: empty node subset");
  const Matrix& z = logits.value();
  const Index n = z.rows(), q = z.cols();
  if (static_cast<Index>(labels.size()) != n)
    throw ShapeError("softmax_cross_entropy: labels length mismatch");
  auto probs = std::make_shared<Matrix>(n, q);
  double total = 0.0;
  for (Index i : subset) {
    if (i < 0 || i >= n)
      throw ShapeError("softmax_cross_entropy: subset index out of range");
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= q)
      throw ValidationError("softmax_cross_entropy: label out of range");
    double mx = z(i, 0);
    for (Index c = 1; c < q; ++c) mx = std::max(mx, z(i, c));
    double denom = 0.0;
    for (Index c = 0; c < q; ++c) denom += std::exp(z(i, c) - mx);
    const double lse = mx + std::log(denom);
    for (Index c = 0; c < q; ++c) (*probs)(i, c) = std::exp(z(i, c) - lse);
    total += lse - z(i, y);
  }
  const double inv_m = 1.0 / static_cast<double>(subset.size());
  Matrix out(1, 1, total * inv_m);
  Tape* tape = resolve_tape({&logits});
  if (!tape) return Tensor(std::move(out));
  int nl = logits.node();
  return tape->record(
      std::move(out),
      [=, labels = labels, subset = subset](Tape& t, const Matrix& g) {
        const double s = g(0, 0) * inv_m;
        Matrix gz(n, q);
        for (Index i : subset) {
          const int y = labels[static_cast<std::size_t>(i)];
          for (Index c = 0; c < q; ++c) gz(i, c) = s * (*probs)(i, c);
          gz(i, y) -= s;
        }
        t.accumulate(nl, std::move(gz));
      });
}

Tensor l1_norm(const Tensor& a) {
  const Matrix& av = a.value();
  double s = 0.0;
  KinkMonitor* mon = KinkMonitor::active();
  for (Index i = 0, n = av.size(); i < n; ++i) {
    const double x = av.data()[i];
    s += std::abs(x);
    if (mon) {
      mon->note_branch(x > 0.0 ? 2 : x < 0.0 ? 0 : 1);
      mon->note_kink_distance(std::abs(x));
    }
  }
  Matrix out(1, 1, s);
  Tape* tape = resolve_tape({&a});
  if (!tape) return Tensor(std::move(out));
  int na = a.node();
  auto sa = a.shared_value();
  return tape->record(std::move(out), [=](Tape& t, const Matrix& g) {
    Matrix ga(sa->rows(), sa->cols());
    for (Index i = 0, n = sa->size(); i < n; ++i) {
      double x = sa->data()[i];
      ga.data()[i] = g(0, 0) * (x > 0.0 ? 1.0 : x < 0.0 ? -1.0 : 0.0);
    }
    t.accumulate(na, std::move(ga));
  });
}

Tensor sparse_dense_matmul(const SparseRealMatrix& sp, const Tensor& d) {
  // The caller keeps `sp` alive until backward completes (graph operators
  // outlive every tape built over them).
  Matrix out = sp.multiply_dense(d.value());
  Tape* tape = resolve_tape({&d});
  if (!tape) return Tensor(std::move(out));
  int nd = d.node();
  const SparseRealMatrix* psp = &sp;
  return tape->record(std::move(out), [=](Tape& t, const Matrix& g) {
    t.accumulate(nd, psp->multiply_dense_transposed(g));
  });
}

Tensor masked_row_softmax(const Tensor& scores, const SparseBoolMatrix& mask) {
  const Matrix& z = scores.value();
  if (z.rows() != mask.rows() || z.cols() != mask.cols())
    throw ShapeError("masked_row_softmax: mask shape mismatch");
  const Index n = z.rows();
  auto alpha = std::make_shared<Matrix>(n, z.cols());
  for (Index r = 0; r < n; ++r) {
    auto cols = mask.row(r);
    if (cols.empty()) continue;
    double mx = z(r, cols[0]);
    for (Index c : cols) mx = std::max(mx, z(r, c));
    double denom = 0.0;
    for (Index c : cols) denom += std::exp(z(r, c) - mx);
    for (Index c : cols) (*alpha)(r, c) = std::exp(z(r, c) - mx) / denom;
  }
  Matrix out = *alpha;
  Tape* tape = resolve_tape({&scores});
  if (!tape) return Tensor(std::move(out));
  int ns = scores.node();
  const SparseBoolMatrix* pmask = &mask;
  return tape->record(std::move(out), [=](Tape& t, const Matrix& g) {
    Matrix gz(alpha->rows(), alpha->cols());
    for (Index r = 0; r < alpha->rows(); ++r) {
      auto cols = pmask->row(r);
      if (cols.empty()) continue;
      double dot = 0.0;
      for (Index c : cols) dot += g(r, c) * (*alpha)(r, c);
      for (Index c : cols) gz(r, c) = (*alpha)(r, c) * (g(r, c) - dot);
    }
    t.accumulate(ns, std::move(gz));
  });
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Index r = 0; r < logits.rows(); ++r) {
    double mx = logits(r, 0);
    for (Index c = 1; c < logits.cols(); ++c) mx = std::max(mx, logits(r, c));
    double denom = 0.0;
    for (Index c = 0; c < logits.cols(); ++c)
      denom += std::exp(logits(r, c) - mx);
    for (Index c = 0; c < logits.cols(); ++c)
      out(r, c) = std::exp(logits(r, c) - mx) / denom;
  }
  return out;
}

}  // namespace hgen
