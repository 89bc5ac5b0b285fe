#include "idsnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "idsnet/errors.hpp"
#include "idsnet/random.hpp"

namespace idsnet {

namespace {

double evaluate(const ScalarFn& f) {
  Tape<double> tape(false);
  const double v = f(tape).item();
  if (!std::isfinite(v)) throw NumericalError("gradcheck: non-finite function value");
  return v;
}

}  // namespace

double gradcheck(const ScalarFn& f, std::span<Tensor<double>> inputs, double h, std::size_t max_per_tensor,
                 std::uint64_t seed) {
  std::vector<bool> previous;
  for (auto& t : inputs) {
    previous.push_back(t.requires_grad());
    t.set_requires_grad();
    t.drop_grad();
  }

  Tape<double> tape;
  auto loss = f(tape);
  if (!std::isfinite(loss.item())) throw NumericalError("gradcheck: non-finite function value");
  tape.backward(loss);

  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t ti = 0; ti < inputs.size(); ++ti) {
    auto& t = inputs[ti];
    std::vector<double> analytic(t.size(), 0.0);
    if (t.has_grad()) std::copy(t.grad().begin(), t.grad().end(), analytic.begin());
    t.drop_grad();

    auto elements = iota_indices(t.size());
    if (max_per_tensor != 0 && elements.size() > max_per_tensor) {
      rng.shuffle(std::span(elements));
      elements.resize(max_per_tensor);
      std::sort(elements.begin(), elements.end());
    }
    auto values = t.values();
    for (auto i : elements) {
      const double original = values[i];
      values[i] = original + h;
      const double up = evaluate(f);
      values[i] = original - h;
      const double down = evaluate(f);
      values[i] = original;
      const double numeric = (up - down) / (2.0 * h);
      const double g = analytic[i];
      if (!std::isfinite(g)) throw NumericalError("gradcheck: non-finite analytic gradient");
      const double err = std::abs(g - numeric) / std::max({1.0, std::abs(g), std::abs(numeric)});
      worst = std::max(worst, err);
    }
  }
  for (std::size_t ti = 0; ti < inputs.size(); ++ti) inputs[ti].set_requires_grad(previous[ti]);
  return worst;
}

double gradcheck(const std::function<Tensor<double>(Tape<double>&, const Tensor<double>&)>& f,
                 const Tensor<double>& x, double h) {
  Tensor<double> handle = x;
  std::vector<Tensor<double>> inputs{handle};
  return gradcheck([&](Tape<double>& tape) { return f(tape, handle); }, inputs, h);
}

}  // namespace idsnet
