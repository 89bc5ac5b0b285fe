#include "idsnet/gradient_suite.hpp"

#include <cmath>

#include "idsnet/gradcheck.hpp"
#include "idsnet/kdd_ingest.hpp"
#include "idsnet/layers.hpp"
#include "idsnet/models.hpp"
#include "idsnet/nn_ops.hpp"
#include "idsnet/ops.hpp"
#include "idsnet/random.hpp"

namespace idsnet {

namespace {

using T = Tensor<double>;

T random_tensor(const Shape& shape, Rng& rng, double scale = 1.0) {
  T t(shape);
  for (auto& v : t.values()) v = scale * rng.normal();
  return t;
}

// Values bounded away from zero so kinks (relu) stay outside the h-ball.
T away_from_zero(const Shape& shape, Rng& rng) {
  T t(shape);
  for (auto& v : t.values()) {
    const double u = rng.uniform(0.05, 1.5);
    v = rng.uniform() < 0.5 ? -u : u;
  }
  return t;
}

// Weighted sum of the output so every element gets a distinct upstream gradient.
T project(Tape<double>& tape, const T& out, const T& weights) {
  return ops::reduce_sum(tape, ops::mul(tape, out, weights));
}

T one_hot_targets(std::size_t batch, Rng& rng) {
  T y({batch, kClassCount});
  for (std::size_t i = 0; i < batch; ++i) y.values()[i * kClassCount + rng.below(kClassCount)] = 1.0;
  return y;
}

GradcheckResult layer_check(const std::string& name, const ScalarFn& f, std::vector<T> inputs) {
  return {name, false, gradcheck(f, inputs), kLayerGradTolerance};
}

}  // namespace

std::vector<GradcheckResult> run_gradient_suite(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<GradcheckResult> out;

  {
    auto a = random_tensor({3, 4}, rng), b = random_tensor({4, 5}, rng), w = random_tensor({3, 5}, rng);
    out.push_back(layer_check("matmul", [&](Tape<double>& t) { return project(t, ops::matmul(t, a, b), w); }, {a, b}));
  }
  {
    auto a = random_tensor({3, 4}, rng), b = random_tensor({4}, rng), w = random_tensor({3, 4}, rng);
    out.push_back(layer_check(
        "elementwise",
        [&](Tape<double>& t) {
          auto s = ops::mul(t, ops::sub(t, ops::add(t, a, b), ops::scale(t, a, 0.5)), ops::sigmoid(t, a));
          auto e = ops::add(t, ops::tanh(t, s), ops::log(t, ops::add(t, ops::exp(t, b), ops::exp(t, a))));
          return project(t, e, w);
        },
        {a, b}));
  }
  {
    auto a = random_tensor({2, 3, 4}, rng), b = random_tensor({2, 2, 4}, rng);
    auto w = random_tensor({2, 4}, rng);
    out.push_back(layer_check(
        "slice_concat_reduce",
        [&](Tape<double>& t) {
          std::vector<T> parts{ops::slice(t, a, 1, 1, 3), b};
          auto c = ops::concat<double>(t, parts, 1);
          auto m = ops::reduce_max(t, c, 1);
          return ops::add(t, project(t, m, w), ops::reduce_sum(t, ops::reduce_sum(t, c, 2)));
        },
        {a, b}));
  }
  {
    auto x = random_tensor({4, 5}, rng);
    Dense<double> layer(5, 3);
    layer.initialize(rng);
    std::vector<NamedTensor<double>> p;
    layer.collect("dense", p);
    auto w = random_tensor({4, 3}, rng);
    out.push_back(layer_check("dense", [&](Tape<double>& t) { return project(t, layer.forward(t, x, Mode::train), w); },
                              {x, p[0].tensor, p[1].tensor}));
  }
  {
    auto x = random_tensor({2, 7, 3}, rng);
    Conv1D<double> layer(3, 4, 3);
    layer.initialize(rng);
    auto b = random_tensor({4}, rng, 0.1);
    std::vector<NamedTensor<double>> p;
    layer.collect("conv", p);
    std::copy(b.values().begin(), b.values().end(), p[1].tensor.values().begin());
    auto w = random_tensor({2, 5, 4}, rng);
    out.push_back(layer_check("conv1d", [&](Tape<double>& t) { return project(t, layer.forward(t, x, Mode::train), w); },
                              {x, p[0].tensor, p[1].tensor}));
  }
  {
    auto x = random_tensor({3, 5, 4}, rng, 2.0);
    BatchNorm<double> layer(4, 0.99, 1e-5);
    std::vector<NamedTensor<double>> p;
    layer.collect("bn", p);
    for (auto& v : p[0].tensor.values()) v = rng.uniform(0.5, 1.5);
    for (auto& v : p[1].tensor.values()) v = rng.normal();
    auto w = random_tensor({3, 5, 4}, rng);
    out.push_back(layer_check("batch_norm_train",
                              [&](Tape<double>& t) { return project(t, layer.forward(t, x, Mode::train), w); },
                              {x, p[0].tensor, p[1].tensor}));
    out.push_back(layer_check("batch_norm_infer",
                              [&](Tape<double>& t) { return project(t, layer.forward(t, x, Mode::infer), w); },
                              {x, p[0].tensor, p[1].tensor}));
  }
  {
    auto x = away_from_zero({3, 6}, rng);
    auto w = random_tensor({3, 6}, rng);
    out.push_back(layer_check("relu", [&](Tape<double>& t) { return project(t, ops::relu(t, x), w); }, {x}));
  }
  {
    auto x = random_tensor({2, 9, 3}, rng);
    auto w = random_tensor({2, 2, 3}, rng);
    out.push_back(layer_check("max_pool1d", [&](Tape<double>& t) { return project(t, ops::max_pool1d(t, x, 4), w); }, {x}));
  }
  for (bool sequences : {true, false}) {
    auto x = random_tensor({2, 4, 3}, rng);
    LSTM<double> layer(3, 5, sequences);
    layer.initialize(rng);
    std::vector<NamedTensor<double>> p;
    layer.collect("lstm", p);
    auto w = sequences ? random_tensor({2, 4, 5}, rng) : random_tensor({2, 5}, rng);
    out.push_back(layer_check(sequences ? "lstm_sequences" : "lstm_last",
                              [&](Tape<double>& t) { return project(t, layer.forward(t, x, Mode::train), w); },
                              {x, p[0].tensor, p[1].tensor, p[2].tensor}));
  }
  {
    auto logits = random_tensor({5, 3}, rng, 2.0);
    auto y = one_hot_targets(5, rng);
    out.push_back(layer_check("softmax_cross_entropy",
                              [&](Tape<double>& t) { return ops::softmax_cross_entropy(t, logits, y).loss; }, {logits}));
  }

  struct Case {
    ModelKind kind;
    std::size_t length;
  };
  for (const auto& c : {Case{ModelKind::dnn, 12}, Case{ModelKind::cnn, 42}, Case{ModelKind::lstm, 6},
                        Case{ModelKind::cnn_lstm, 42}}) {
    Model<double> model(make_descriptor(c.kind, c.length), rng.next());
    const std::size_t batch = 4;
    auto x = random_tensor({batch, c.length}, rng);
    auto y = one_hot_targets(batch, rng);
    auto params = model.parameters();
    const double err = gradcheck(
        [&](Tape<double>& t) { return ops::softmax_cross_entropy(t, model.forward(t, x, Mode::train), y).loss; },
        params, 1e-5, 40, rng.next());
    out.push_back({"model_" + std::string(model_kind_name(c.kind)), true, err, kEndToEndGradTolerance});
  }
  return out;
}

}  // namespace idsnet
