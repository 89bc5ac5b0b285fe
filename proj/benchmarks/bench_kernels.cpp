#include <benchmark/benchmark.h>

#include "idsnet/nn_ops.hpp"
#include "idsnet/ops.hpp"
#include "idsnet/random.hpp"

using namespace idsnet;

namespace {

Tensor<float> random_tensor(Shape shape, std::uint64_t seed) {
  Rng rng(seed);
  Tensor<float> t(std::move(shape));
  for (auto& v : t.values()) v = static_cast<float>(rng.normal());
  return t;
}

void bm_matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_tensor({n, n}, 1), b = random_tensor({n, n}, 2);
  for (auto _ : state) {
    Tape<float> tape(false);
    benchmark::DoNotOptimize(ops::matmul(tape, a, b));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(bm_matmul)->Arg(64)->Arg(128)->Arg(256);

// Batch 500, one channel, 118 features, 64 filters of width 3.
void bm_conv1d_forward_backward(benchmark::State& state) {
  const auto x = random_tensor({500, 118, 1}, 3);
  auto w = random_tensor({3, 1, 64}, 4), b = random_tensor({64}, 5);
  w.set_requires_grad();
  b.set_requires_grad();
  for (auto _ : state) {
    w.zero_grad();
    b.zero_grad();
    Tape<float> tape;
    auto loss = ops::reduce_sum(tape, ops::conv1d(tape, x, w, b));
    tape.backward(loss);
    benchmark::DoNotOptimize(w.grad_mut()[0]);
  }
}
BENCHMARK(bm_conv1d_forward_backward)->Unit(benchmark::kMillisecond);

void bm_max_pool(benchmark::State& state) {
  const auto x = random_tensor({500, 116, 64}, 6);
  for (auto _ : state) {
    Tape<float> tape(false);
    benchmark::DoNotOptimize(ops::max_pool1d(tape, x, 4));
  }
}
BENCHMARK(bm_max_pool)->Unit(benchmark::kMillisecond);

}  // namespace
