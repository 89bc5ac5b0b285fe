#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "idsnet/random.hpp"
#include "idsnet/tape.hpp"
#include "idsnet/tensor.hpp"

namespace idsnet {

enum class Mode { train, infer };

template <typename T>
struct NamedTensor {
  std::string name;
  Tensor<T> tensor;
  // false for state such as batch-norm running statistics.
  bool trainable = true;
};

// A network stage. Shapes passed to output_shape() exclude the batch axis.
template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string_view kind() const = 0;
  virtual Tensor<T> forward(Tape<T>& tape, const Tensor<T>& x, Mode mode) = 0;
  virtual Shape output_shape(const Shape& in) const = 0;
  virtual void initialize(Rng& /*rng*/) {}
  virtual void collect(const std::string& /*prefix*/, std::vector<NamedTensor<T>>& /*out*/) {}
};

// Glorot/Xavier uniform fill in [-sqrt(6 / (fan_in + fan_out)), +...].
template <typename T>
void glorot_uniform(Tensor<T>& t, std::size_t fan_in, std::size_t fan_out, Rng& rng);

template <typename T>
class Conv1D final : public Layer<T> {
 public:
  Conv1D(std::size_t in_channels, std::size_t filters = 64, std::size_t kernel_size = 3);
  std::string_view kind() const override { return "conv1d"; }
  Tensor<T> forward(Tape<T>& tape, const Tensor<T>& x, Mode mode) override;
  Shape output_shape(const Shape& in) const override;
  void initialize(Rng& rng) override;
  void collect(const std::string& prefix, std::vector<NamedTensor<T>>& out) override;

  Tensor<T>& weight() { return weight_; }  // (kernel, in_channels, filters)
  Tensor<T>& bias() { return bias_; }

 private:
  std::size_t in_channels_, filters_, kernel_;
  Tensor<T> weight_, bias_;
};

template <typename T>
class BatchNorm final : public Layer<T> {
 public:
  explicit BatchNorm(std::size_t channels, T momentum = T(0.99), T epsilon = T(1e-5));
  std::string_view kind() const override { return "batch_norm"; }
  Tensor<T> forward(Tape<T>& tape, const Tensor<T>& x, Mode mode) override;
  Shape output_shape(const Shape& in) const override;
  void initialize(Rng& rng) override;
  void collect(const std::string& prefix, std::vector<NamedTensor<T>>& out) override;

  Tensor<T>& gamma() { return gamma_; }
  Tensor<T>& beta() { return beta_; }
  Tensor<T>& running_mean() { return running_mean_; }
  Tensor<T>& running_var() { return running_var_; }

 private:
  std::size_t channels_;
  T momentum_, epsilon_;
  Tensor<T> gamma_, beta_, running_mean_, running_var_;
};

template <typename T>
class ReLU final : public Layer<T> {
 public:
  std::string_view kind() const override { return "relu"; }
  Tensor<T> forward(Tape<T>& tape, const Tensor<T>& x, Mode mode) override;
  Shape output_shape(const Shape& in) const override { return in; }
};

template <typename T>
class MaxPool1D final : public Layer<T> {
 public:
  explicit MaxPool1D(std::size_t pool = 4) : pool_(pool) {}
  std::string_view kind() const override { return "max_pool1d"; }
  Tensor<T> forward(Tape<T>& tape, const Tensor<T>& x, Mode mode) override;
  Shape output_shape(const Shape& in) const override;

 private:
  std::size_t pool_;
};

// LSTM with gate order input, forget, cell candidate, output. Zero initial
// state. Input (batch, steps, features); output (batch, units), or
// (batch, steps, units) when return_sequences is set.
template <typename T>
class LSTM final : public Layer<T> {
 public:
  LSTM(std::size_t input_size, std::size_t units = 64, bool return_sequences = false);
  std::string_view kind() const override { return "lstm"; }
  Tensor<T> forward(Tape<T>& tape, const Tensor<T>& x, Mode mode) override;
  Shape output_shape(const Shape& in) const override;
  void initialize(Rng& rng) override;
  void collect(const std::string& prefix, std::vector<NamedTensor<T>>& out) override;

  Tensor<T>& input_weight() { return input_weight_; }          // (input, 4 * units)
  Tensor<T>& recurrent_weight() { return recurrent_weight_; }  // (units, 4 * units)
  Tensor<T>& bias() { return bias_; }                          // (4 * units)
  std::size_t units() const { return units_; }

 private:
  std::size_t input_size_, units_;
  bool return_sequences_;
  Tensor<T> input_weight_, recurrent_weight_, bias_;
};

// y = x W + b; x (batch, in).
template <typename T>
class Dense final : public Layer<T> {
 public:
  Dense(std::size_t in, std::size_t out);
  std::string_view kind() const override { return "dense"; }
  Tensor<T> forward(Tape<T>& tape, const Tensor<T>& x, Mode mode) override;
  Shape output_shape(const Shape& in) const override;
  void initialize(Rng& rng) override;
  void collect(const std::string& prefix, std::vector<NamedTensor<T>>& out) override;

  Tensor<T>& weight() { return weight_; }
  Tensor<T>& bias() { return bias_; }

 private:
  std::size_t in_, out_;
  Tensor<T> weight_, bias_;
};

// Reinterprets each sample with a new per-sample shape.
template <typename T>
class Reshape final : public Layer<T> {
 public:
  explicit Reshape(Shape per_sample) : per_sample_(std::move(per_sample)) {}
  std::string_view kind() const override { return "reshape"; }
  Tensor<T> forward(Tape<T>& tape, const Tensor<T>& x, Mode mode) override;
  Shape output_shape(const Shape& in) const override;

 private:
  Shape per_sample_;
};

template <typename T>
class Flatten final : public Layer<T> {
 public:
  std::string_view kind() const override { return "flatten"; }
  Tensor<T> forward(Tape<T>& tape, const Tensor<T>& x, Mode mode) override;
  Shape output_shape(const Shape& in) const override { return {shape_size(in)}; }
};

}  // namespace idsnet
