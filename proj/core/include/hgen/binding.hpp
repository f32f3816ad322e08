#pragma once

#include <utility>
#include <vector>

#include "hgen/optim.hpp"
#include "hgen/tensor.hpp"

namespace hgen {

/// Binds parameters to one tape for one unit of work. In train mode each
/// parameter becomes a gradient-carrying leaf (bound once, reused); with a
/// null tape parameters enter the computation as constants (eval mode).
/// After backward, write_back_grads() accumulates tape gradients into the
/// store in binding order.
class TapeBinder {
 public:
  TapeBinder(ParamStore& store, Tape* tape) : store_(&store), tape_(tape) {}

  Tensor use(int param_id);

  Tape* tape() const { return tape_; }
  bool recording() const { return tape_ != nullptr; }

  void write_back_grads();

 private:
  ParamStore* store_;
  Tape* tape_;
  std::vector<std::pair<int, Tensor>> bound_;
};

}  // namespace hgen
