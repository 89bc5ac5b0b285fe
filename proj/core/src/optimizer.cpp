#include "idsnet/optimizer.hpp"

#include <cmath>
#include <string>

#include "idsnet/errors.hpp"

namespace idsnet {

template <typename T>
void optimizer_step(std::span<Tensor<T>> params, OptimizerState<T>& state, const OptimizerConfig& config) {
  if (config.kind == OptimizerKind::adam) {
    if (state.first_moment.empty() && state.second_moment.empty()) {
      for (const auto& p : params) {
        state.first_moment.emplace_back(p.shape());
        state.second_moment.emplace_back(p.shape());
      }
    }
    if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size())
      throw ShapeError("optimizer_step: state holds " + std::to_string(state.first_moment.size()) +
                       " moments for " + std::to_string(params.size()) + " parameters");
    for (std::size_t i = 0; i < params.size(); ++i)
      if (state.first_moment[i].shape() != params[i].shape() || state.second_moment[i].shape() != params[i].shape())
        throw ShapeError("optimizer_step: parameter " + std::to_string(i) + " has shape " +
                         shape_str(params[i].shape()) + " but its moments have shape " +
                         shape_str(state.first_moment[i].shape()));
  }
  for (const auto& p : params)
    if (p.has_grad() && p.grad().size() != p.size())
      throw ShapeError("optimizer_step: gradient does not match parameter shape " + shape_str(p.shape()));

  ++state.step;
  const T lr = static_cast<T>(config.learning_rate);
  if (config.kind == OptimizerKind::sgd) {
    for (auto& p : params) {
      if (!p.has_grad()) continue;
      auto v = p.values();
      const auto g = p.grad();
      for (std::size_t k = 0; k < v.size(); ++k) v[k] -= lr * g[k];
    }
    return;
  }

  const auto t = static_cast<double>(state.step);
  const T b1 = static_cast<T>(config.beta1), b2 = static_cast<T>(config.beta2);
  const T c1 = static_cast<T>(1.0 - std::pow(config.beta1, t));
  const T c2 = static_cast<T>(1.0 - std::pow(config.beta2, t));
  const T eps = static_cast<T>(config.epsilon);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto m = state.first_moment[i].values();
    auto s = state.second_moment[i].values();
    auto v = p.values();
    const auto g = p.grad();
    const bool has = p.has_grad();
    for (std::size_t k = 0; k < v.size(); ++k) {
      const T gk = has ? g[k] : T{0};
      m[k] = b1 * m[k] + (T{1} - b1) * gk;
      s[k] = b2 * s[k] + (T{1} - b2) * gk * gk;
      v[k] -= lr * (m[k] / c1) / (std::sqrt(s[k] / c2) + eps);
    }
  }
}

template void optimizer_step(std::span<Tensor<float>>, OptimizerState<float>&, const OptimizerConfig&);
template void optimizer_step(std::span<Tensor<double>>, OptimizerState<double>&, const OptimizerConfig&);

}  // namespace idsnet
