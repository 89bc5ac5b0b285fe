#include "idsnet/layers.hpp"

#include <cmath>
#include <string>

#include "idsnet/errors.hpp"
#include "idsnet/nn_ops.hpp"
#include "idsnet/ops.hpp"

namespace idsnet {

namespace {

[[noreturn]] void bad_input(std::string_view layer, const Shape& got, const std::string& expected) {
  throw ShapeError(std::string(layer) + ": expected input " + expected + ", got " + shape_str(got));
}

}  // namespace

template <typename T>
void glorot_uniform(Tensor<T>& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : t.values()) v = static_cast<T>(rng.uniform(-limit, limit));
}

// Conv1D

template <typename T>
Conv1D<T>::Conv1D(std::size_t in_channels, std::size_t filters, std::size_t kernel_size)
    : in_channels_(in_channels),
      filters_(filters),
      kernel_(kernel_size),
      weight_({kernel_size, in_channels, filters}),
      bias_({filters}) {
  weight_.set_requires_grad();
  bias_.set_requires_grad();
}

template <typename T>
Tensor<T> Conv1D<T>::forward(Tape<T>& tape, const Tensor<T>& x, Mode) {
  return ops::conv1d(tape, x, weight_, bias_);
}

template <typename T>
Shape Conv1D<T>::output_shape(const Shape& in) const {
  if (in.size() != 2 || in[1] != in_channels_) bad_input(kind(), in, "(length, " + std::to_string(in_channels_) + ")");
  if (in[0] < kernel_)
    throw ShapeError("conv1d: input length " + std::to_string(in[0]) + " shorter than kernel " +
                     std::to_string(kernel_));
  return {in[0] - kernel_ + 1, filters_};
}

template <typename T>
void Conv1D<T>::initialize(Rng& rng) {
  glorot_uniform(weight_, kernel_ * in_channels_, kernel_ * filters_, rng);
  for (auto& v : bias_.values()) v = T{0};
}

template <typename T>
void Conv1D<T>::collect(const std::string& prefix, std::vector<NamedTensor<T>>& out) {
  out.push_back({prefix + ".weight", weight_, true});
  out.push_back({prefix + ".bias", bias_, true});
}

// BatchNorm

template <typename T>
BatchNorm<T>::BatchNorm(std::size_t channels, T momentum, T epsilon)
    : channels_(channels),
      momentum_(momentum),
      epsilon_(epsilon),
      gamma_({channels}, T{1}),
      beta_({channels}, T{0}),
      running_mean_({channels}, T{0}),
      running_var_({channels}, T{1}) {
  gamma_.set_requires_grad();
  beta_.set_requires_grad();
}

template <typename T>
Tensor<T> BatchNorm<T>::forward(Tape<T>& tape, const Tensor<T>& x, Mode mode) {
  return ops::batch_norm(tape, x, gamma_, beta_, running_mean_, running_var_,
                         ops::BatchNormConfig<T>{mode == Mode::train, momentum_, epsilon_});
}

template <typename T>
Shape BatchNorm<T>::output_shape(const Shape& in) const {
  if (in.empty() || in.back() != channels_) bad_input(kind(), in, "(..., " + std::to_string(channels_) + ")");
  return in;
}

template <typename T>
void BatchNorm<T>::initialize(Rng&) {
  for (auto& v : gamma_.values()) v = T{1};
  for (auto& v : beta_.values()) v = T{0};
  for (auto& v : running_mean_.values()) v = T{0};
  for (auto& v : running_var_.values()) v = T{1};
}

template <typename T>
void BatchNorm<T>::collect(const std::string& prefix, std::vector<NamedTensor<T>>& out) {
  out.push_back({prefix + ".gamma", gamma_, true});
  out.push_back({prefix + ".beta", beta_, true});
  out.push_back({prefix + ".running_mean", running_mean_, false});
  out.push_back({prefix + ".running_var", running_var_, false});
}

// ReLU, MaxPool1D

template <typename T>
Tensor<T> ReLU<T>::forward(Tape<T>& tape, const Tensor<T>& x, Mode) {
  return ops::relu(tape, x);
}

template <typename T>
Tensor<T> MaxPool1D<T>::forward(Tape<T>& tape, const Tensor<T>& x, Mode) {
  return ops::max_pool1d(tape, x, pool_);
}

template <typename T>
Shape MaxPool1D<T>::output_shape(const Shape& in) const {
  if (in.size() != 2) bad_input(kind(), in, "(length, channels)");
  if (in[0] < pool_)
    throw ShapeError("max_pool1d: input length " + std::to_string(in[0]) + " shorter than pool " +
                     std::to_string(pool_));
  return {in[0] / pool_, in[1]};
}

// LSTM

template <typename T>
LSTM<T>::LSTM(std::size_t input_size, std::size_t units, bool return_sequences)
    : input_size_(input_size),
      units_(units),
      return_sequences_(return_sequences),
      input_weight_({input_size, 4 * units}),
      recurrent_weight_({units, 4 * units}),
      bias_({4 * units}) {
  input_weight_.set_requires_grad();
  recurrent_weight_.set_requires_grad();
  bias_.set_requires_grad();
}

template <typename T>
Tensor<T> LSTM<T>::forward(Tape<T>& tape, const Tensor<T>& x, Mode) {
  if (x.rank() != 3 || x.dim(2) != input_size_)
    bad_input(kind(), x.shape(), "(batch, steps, " + std::to_string(input_size_) + ")");
  const std::size_t B = x.dim(0), steps = x.dim(1), H = units_;
  if (steps == 0) throw ShapeError("lstm: input has zero time steps");

  auto projected = ops::matmul(tape, ops::reshape(tape, x, {B * steps, input_size_}), input_weight_);
  projected = ops::reshape(tape, ops::add(tape, projected, bias_), {B, steps, 4 * H});
  const auto sequence = ops::lstm_recurrence(tape, projected, recurrent_weight_);
  if (return_sequences_) return sequence;
  return ops::reshape(tape, ops::slice(tape, sequence, 1, steps - 1, steps), {B, H});
}

template <typename T>
Shape LSTM<T>::output_shape(const Shape& in) const {
  if (in.size() != 2 || in[1] != input_size_) bad_input(kind(), in, "(steps, " + std::to_string(input_size_) + ")");
  if (in[0] == 0) throw ShapeError("lstm: input has zero time steps");
  return return_sequences_ ? Shape{in[0], units_} : Shape{units_};
}

template <typename T>
void LSTM<T>::initialize(Rng& rng) {
  glorot_uniform(input_weight_, input_size_, 4 * units_, rng);
  glorot_uniform(recurrent_weight_, units_, 4 * units_, rng);
  auto b = bias_.values();
  for (std::size_t k = 0; k < b.size(); ++k) b[k] = (k >= units_ && k < 2 * units_) ? T{1} : T{0};
}

template <typename T>
void LSTM<T>::collect(const std::string& prefix, std::vector<NamedTensor<T>>& out) {
  out.push_back({prefix + ".input_weight", input_weight_, true});
  out.push_back({prefix + ".recurrent_weight", recurrent_weight_, true});
  out.push_back({prefix + ".bias", bias_, true});
}

// Dense

template <typename T>
Dense<T>::Dense(std::size_t in, std::size_t out) : in_(in), out_(out), weight_({in, out}), bias_({out}) {
  weight_.set_requires_grad();
  bias_.set_requires_grad();
}

template <typename T>
Tensor<T> Dense<T>::forward(Tape<T>& tape, const Tensor<T>& x, Mode) {
  if (x.rank() != 2 || x.dim(1) != in_) bad_input(kind(), x.shape(), "(batch, " + std::to_string(in_) + ")");
  return ops::add(tape, ops::matmul(tape, x, weight_), bias_);
}

template <typename T>
Shape Dense<T>::output_shape(const Shape& in) const {
  if (in.size() != 1 || in[0] != in_) bad_input(kind(), in, "(" + std::to_string(in_) + ")");
  return {out_};
}

template <typename T>
void Dense<T>::initialize(Rng& rng) {
  glorot_uniform(weight_, in_, out_, rng);
  for (auto& v : bias_.values()) v = T{0};
}

template <typename T>
void Dense<T>::collect(const std::string& prefix, std::vector<NamedTensor<T>>& out) {
  out.push_back({prefix + ".weight", weight_, true});
  out.push_back({prefix + ".bias", bias_, true});
}

// Reshape, Flatten

template <typename T>
Tensor<T> Reshape<T>::forward(Tape<T>& tape, const Tensor<T>& x, Mode) {
  if (x.rank() == 0) bad_input(kind(), x.shape(), "(batch, ...)");
  Shape target{x.dim(0)};
  target.insert(target.end(), per_sample_.begin(), per_sample_.end());
  return ops::reshape(tape, x, target);
}

template <typename T>
Shape Reshape<T>::output_shape(const Shape& in) const {
  if (shape_size(in) != shape_size(per_sample_)) bad_input(kind(), in, "with " + std::to_string(shape_size(per_sample_)) + " elements");
  return per_sample_;
}

template <typename T>
Tensor<T> Flatten<T>::forward(Tape<T>& tape, const Tensor<T>& x, Mode) {
  if (x.rank() == 0) bad_input(kind(), x.shape(), "(batch, ...)");
  return ops::reshape(tape, x, {x.dim(0), x.size() / std::max<std::size_t>(1, x.dim(0))});
}

#define IDSNET_INSTANTIATE_LAYERS(T)                                              \
  template void glorot_uniform(Tensor<T>&, std::size_t, std::size_t, Rng&);        \
  template class Conv1D<T>;                                                        \
  template class BatchNorm<T>;                                                     \
  template class ReLU<T>;                                                          \
  template class MaxPool1D<T>;                                                     \
  template class LSTM<T>;                                                          \
  template class Dense<T>;                                                         \
  template class Reshape<T>;                                                       \
  template class Flatten<T>;

IDSNET_INSTANTIATE_LAYERS(float)
IDSNET_INSTANTIATE_LAYERS(double)

}  // namespace idsnet
