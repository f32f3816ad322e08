#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "hgen/matrix.hpp"

namespace hgen {

class Tape;

/// Dense 2-D value, optionally attached to a Tape node. Tensors without a
/// node are constants with respect to differentiation. Values are shared
/// and immutable once wrapped.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Matrix value)
      : value_(std::make_shared<const Matrix>(std::move(value))) {}

  static Tensor scalar(double v) { return Tensor(Matrix(1, 1, v)); }

  const Matrix& value() const { return *value_; }
  std::shared_ptr<const Matrix> shared_value() const { return value_; }
  double scalar_value() const;

  Index rows() const { return value_ ? value_->rows() : 0; }
  Index cols() const { return value_ ? value_->cols() : 0; }

  bool has_node() const { return node_ >= 0; }
  bool requires_grad() const { return node_ >= 0; }
  int node() const { return node_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  std::shared_ptr<const Matrix> value_;
  Tape* tape_ = nullptr;
  int node_ = -1;
};

/// Instrumentation hook used by gradient checks to detect finite-difference
/// evaluations that stepped over a subgradient kink. Ops fold their branch
/// decisions (relu signs, L1 signs, row-extremum indices, degeneracy flags)
/// into a running hash; two evaluations on the same piecewise branch hash
/// identically, so a hash mismatch between the +h/-h runs marks the
/// coordinate as kink-crossing. The nearest kink distance is kept as
/// diagnostics.
struct KinkMonitor {
  std::uint64_t branch_hash = 1469598103934665603ULL;
  double min_abs_kink_input = std::numeric_limits<double>::infinity();

  void note_branch(std::uint64_t v) {
    branch_hash = (branch_hash ^ (v + 0x9e3779b97f4a7c15ULL)) *
                  1099511628211ULL;
  }
  void note_kink_distance(double d) {
    if (d < min_abs_kink_input) min_abs_kink_input = d;
  }

  static KinkMonitor* active();

  /// Installs a monitor for the current thread for the lifetime of the scope.
  class Scope {
   public:
    explicit Scope(KinkMonitor* m);
    ~Scope();
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    KinkMonitor* prev_;
  };
};

/// Append-only record of differentiable operations. Single-threaded; one
/// tape per unit of work, rebuilt every training step. Backward visits
/// nodes in strict reverse append order exactly once.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Matrix& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Registers a gradient-carrying leaf (a parameter for this step).
  Tensor leaf(Matrix value);

  /// Records an interior node. `backward` receives the output gradient and
  /// accumulates into the node's inputs via accumulate().
  Tensor record(Matrix out_value, BackwardFn backward);

  void accumulate(int node, Matrix&& g);
  void accumulate(int node, const Matrix& g);

  /// Seeds a gradient at a node prior to run_backward(); used when a
  /// downstream tape supplies the gradient of a transferred value.
  void seed(const Tensor& t, Matrix grad);

  /// Seeds d(loss)/d(loss) = 1 and sweeps. Loss must be 1x1.
  void backward(const Tensor& loss);

  void run_backward();

  bool has_grad(const Tensor& t) const;
  const Matrix& grad(const Tensor& t) const;

  std::size_t num_nodes() const { return nodes_.size(); }
  bool backward_ran() const { return backward_ran_; }

 private:
  struct Node {
    BackwardFn backward;  // empty for leaves
    Index rows;
    Index cols;
  };

  void check_owns(const Tensor& t) const;

  std::vector<Node> nodes_;
  std::vector<std::unique_ptr<Matrix>> grads_;
  bool backward_ran_ = false;
};

}  // namespace hgen
