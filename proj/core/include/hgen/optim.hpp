#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hgen/matrix.hpp"

namespace hgen {

struct AdamConfig {
  double lr = 5e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled
};

struct AdamState {
  Matrix m;
  Matrix v;
  std::int64_t t = 0;
};

/// One bias-corrected Adam update. Decoupled weight decay is applied
/// directly to the parameter, not folded into the gradient.
void adam_step(Matrix& param, const Matrix& grad, AdamState& state,
               const AdamConfig& cfg);

/// Named learnable parameter with its gradient accumulator and optimizer
/// state. Owned by the model; tapes bind copies of `value` as leaves each
/// step and write back into `grad`.
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
  AdamState adam;
  bool frozen = false;
};

/// Creation-ordered parameter registry shared by all model components.
class ParamStore {
 public:
  int add(std::string name, Matrix init);

  Param& at(int id) { return params_[static_cast<std::size_t>(id)]; }
  const Param& at(int id) const { return params_[static_cast<std::size_t>(id)]; }

  std::size_t size() const { return params_.size(); }
  std::vector<Param>& all() { return params_; }
  const std::vector<Param>& all() const { return params_; }

  void zero_grads();

  /// Adam over every non-frozen parameter, in creation order.
  void step(const AdamConfig& cfg);

  /// Deep copy / restore of values only (early-stopping snapshots).
  std::vector<Matrix> snapshot_values() const;
  void restore_values(const std::vector<Matrix>& values);

 private:
  std::vector<Param> params_;
};

}  // namespace hgen
