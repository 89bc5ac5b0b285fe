#include <benchmark/benchmark.h>

#include "idsnet/layers.hpp"
#include "idsnet/models.hpp"
#include "idsnet/nn_ops.hpp"
#include "idsnet/ops.hpp"
#include "idsnet/optimizer.hpp"
#include "idsnet/random.hpp"

using namespace idsnet;

namespace {

constexpr std::size_t kFeatures = 118;

Tensor<float> random_batch(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Tensor<float> t({rows, cols});
  for (auto& v : t.values()) v = static_cast<float>(rng.normal());
  return t;
}

Tensor<float> random_targets(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  Tensor<float> t({rows, 3});
  for (std::size_t i = 0; i < rows; ++i) t[i * 3 + rng.below(3)] = 1.0f;
  return t;
}

// 6 steps of 64 units over 64 channels, the shape the hybrid model feeds its LSTM.
void bm_lstm_forward_backward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  LSTM<float> lstm(64, 64, false);
  Rng rng(1);
  lstm.initialize(rng);
  Tensor<float> x({batch, 6, 64});
  for (auto& v : x.values()) v = static_cast<float>(rng.normal());
  std::vector<NamedTensor<float>> params;
  lstm.collect("lstm", params);
  for (auto _ : state) {
    for (auto& p : params) p.tensor.zero_grad();
    Tape<float> tape;
    auto loss = ops::reduce_sum(tape, lstm.forward(tape, x, Mode::train));
    tape.backward(loss);
  }
}
BENCHMARK(bm_lstm_forward_backward)->Arg(20)->Arg(500)->Unit(benchmark::kMillisecond);

void bm_train_step(benchmark::State& state) {
  const auto kind = static_cast<ModelKind>(state.range(0));
  Model<float> model(make_descriptor(kind, kFeatures), 42);
  const auto x = random_batch(500, kFeatures, 2);
  const auto y = random_targets(500, 3);
  auto params = model.parameters();
  OptimizerState<float> opt;
  for (auto _ : state) {
    model.zero_grad();
    Tape<float> tape;
    auto r = ops::softmax_cross_entropy(tape, model.forward(tape, x, Mode::train), y);
    tape.backward(r.loss);
    optimizer_step(std::span(params), opt, {});
  }
  state.SetLabel(std::string(model_kind_name(kind)));
  state.SetItemsProcessed(state.iterations() * 500);
}
BENCHMARK(bm_train_step)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void bm_inference(benchmark::State& state) {
  Model<float> model(make_descriptor(ModelKind::cnn_lstm, kFeatures), 42);
  const auto x = random_batch(20, kFeatures, 4);
  for (auto _ : state) {
    Tape<float> tape(false);
    benchmark::DoNotOptimize(model.forward(tape, x, Mode::infer));
  }
  state.SetItemsProcessed(state.iterations() * 20);
}
BENCHMARK(bm_inference)->Unit(benchmark::kMillisecond);

}  // namespace
