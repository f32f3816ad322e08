#include "hgen/binding.hpp"

namespace hgen {

Tensor TapeBinder::use(int param_id) {
  if (!tape_) return Tensor(store_->at(param_id).value);
  for (const auto& [id, t] : bound_)
    if (id == param_id) return t;
  Tensor leaf = tape_->leaf(store_->at(param_id).value);
  bound_.emplace_back(param_id, leaf);
  return leaf;
}

void TapeBinder::write_back_grads() {
  if (!tape_) return;
  for (const auto& [id, t] : bound_) {
    if (!tape_->has_grad(t)) continue;
    store_->at(id).grad.add_scaled(tape_->grad(t));
  }
}

}  // namespace hgen
