#include "hgen/tensor.hpp"

#include "hgen/error.hpp"

namespace hgen {

namespace {
thread_local KinkMonitor* g_active_monitor = nullptr;
}

KinkMonitor* KinkMonitor::active() { return g_active_monitor; }

KinkMonitor::Scope::Scope(KinkMonitor* m) : prev_(g_active_monitor) {
  g_active_monitor = m;
}

KinkMonitor::Scope::~Scope() { g_active_monitor = prev_; }

double Tensor::scalar_value() const {
  if (rows() != 1 || cols() != 1)
    throw ShapeError("tensor: scalar_value on non 1x1 tensor");
  return value()(0, 0);
}

Tensor Tape::leaf(Matrix value) {
  Tensor t(std::move(value));
  t.tape_ = this;
  t.node_ = static_cast<int>(nodes_.size());
  nodes_.push_back({{}, t.rows(), t.cols()});
  grads_.emplace_back(nullptr);
  return t;
}

Tensor Tape::record(Matrix out_value, BackwardFn backward) {
  Tensor t(std::move(out_value));
  t.tape_ = this;
  t.node_ = static_cast<int>(nodes_.size());
  nodes_.push_back({std::move(backward), t.rows(), t.cols()});
  grads_.emplace_back(nullptr);
  return t;
}

void Tape::accumulate(int node, Matrix&& g) {
  auto& slot = grads_[static_cast<std::size_t>(node)];
  if (!slot) {
    slot = std::make_unique<Matrix>(std::move(g));
  } else {
    slot->add_scaled(g);
  }
}

void Tape::accumulate(int node, const Matrix& g) {
  auto& slot = grads_[static_cast<std::size_t>(node)];
  if (!slot) {
    slot = std::make_unique<Matrix>(g);
  } else {
    slot->add_scaled(g);
  }
}

void Tape::check_owns(const Tensor& t) const {
  if (t.tape() != this || !t.has_node())
    throw Error("tape: tensor does not belong to this tape");
}

void Tape::seed(const Tensor& t, Matrix grad) {
  check_owns(t);
  if (grad.rows() != t.rows() || grad.cols() != t.cols())
    throw ShapeError("tape: seed gradient shape mismatch");
  accumulate(t.node(), std::move(grad));
}

void Tape::backward(const Tensor& loss) {
  check_owns(loss);
  if (loss.rows() != 1 || loss.cols() != 1)
    throw ShapeError("backward: loss must be a 1x1 scalar tensor");
  seed(loss, Matrix(1, 1, 1.0));
  run_backward();
}

void Tape::run_backward() {
  if (backward_ran_) throw Error("tape: backward already ran");
  backward_ran_ = true;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    const auto& node = nodes_[i];
    if (!node.backward) continue;  // leaf
    const auto& g = grads_[i];
    if (!g) continue;  // no path from any seeded output
    node.backward(*this, *g);
  }
}

bool Tape::has_grad(const Tensor& t) const {
  check_owns(t);
  return grads_[static_cast<std::size_t>(t.node())] != nullptr;
}

const Matrix& Tape::grad(const Tensor& t) const {
  check_owns(t);
  const auto& g = grads_[static_cast<std::size_t>(t.node())];
  if (!g) throw Error("tape: no gradient accumulated for this node");
  return *g;
}

}  // namespace hgen
