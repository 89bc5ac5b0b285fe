#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "idsnet/tensor.hpp"

namespace idsnet {

enum class OptimizerKind : std::uint8_t { adam = 0, sgd = 1 };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;

  bool operator==(const OptimizerConfig&) const = default;
};

// Adam moment estimates, one tensor per parameter; empty for SGD.
template <typename T>
struct OptimizerState {
  std::uint64_t step = 0;
  std::vector<Tensor<T>> first_moment;
  std::vector<Tensor<T>> second_moment;
};

// Applies one update using each parameter's accumulated gradient (a missing
// gradient counts as zero). Adam:
//   m = b1 m + (1 - b1) g,  v = b2 v + (1 - b2) g^2
//   p -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
// SGD: p -= lr * g. Moments are allocated on the first call; afterwards a
// parameter list that does not match them throws ShapeError.
template <typename T>
void optimizer_step(std::span<Tensor<T>> params, OptimizerState<T>& state, const OptimizerConfig& config);

}  // namespace idsnet
