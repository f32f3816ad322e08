#include "hgen/optim.hpp"

#include <cmath>

#include "hgen/error.hpp"

namespace hgen {

void adam_step(Matrix& param, const Matrix& grad, AdamState& state,
               const AdamConfig& cfg) {
  if (!param.same_shape(grad)) throw ShapeError("adam_step: grad shape mismatch");
  if (state.t == 0) {
    state.m = Matrix(param.rows(), param.cols());
    state.v = Matrix(param.rows(), param.cols());
  }
  if (!state.m.same_shape(param))
    throw ShapeError("adam_step: state shape mismatch");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  double* p = param.data();
  const double* g = grad.data();
  double* m = state.m.data();
  double* v = state.v.data();
  for (Index i = 0, n = param.size(); i < n; ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    p[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    if (cfg.weight_decay != 0.0) p[i] -= cfg.lr * cfg.weight_decay * p[i];
  }
}

int ParamStore::add(std::string name, Matrix init) {
  Param p;
  p.name = std::move(name);
  p.grad = Matrix(init.rows(), init.cols());
  p.value = std::move(init);
  params_.push_back(std::move(p));
  return static_cast<int>(params_.size()) - 1;
}

void ParamStore::zero_grads() {
  for (Param& p : params_) p.grad = Matrix(p.value.rows(), p.value.cols());
}

void ParamStore::step(const AdamConfig& cfg) {
  for (Param& p : params_) {
    if (p.frozen) continue;
    adam_step(p.value, p.grad, p.adam, cfg);
  }
}

std::vector<Matrix> ParamStore::snapshot_values() const {
  std::vector<Matrix> out;
  out.reserve(params_.size());
  for (const Param& p : params_) out.push_back(p.value);
  return out;
}

void ParamStore::restore_values(const std::vector<Matrix>& values) {
  if (values.size() != params_.size())
    throw ShapeError("param store: snapshot size mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) params_[i].value = values[i];
}

}  // namespace hgen
