#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "idsnet/bytes.hpp"
#include "idsnet/layers.hpp"

namespace idsnet {

enum class ModelKind : std::uint8_t { dnn = 0, cnn = 1, lstm = 2, cnn_lstm = 3 };

std::string_view model_kind_name(ModelKind kind);
// Accepts "dnn", "cnn", "lstm", "cnn-lstm" and "cnn_lstm".
std::optional<ModelKind> model_kind_from_name(std::string_view name);

// Everything needed to rebuild a model's parameter shapes.
struct ArchitectureDescriptor {
  ModelKind kind = ModelKind::cnn_lstm;
  std::size_t input_length = 0;  // F
  std::size_t classes = 3;
  std::size_t filters = 64;
  std::size_t kernel_size = 3;
  std::size_t pool_size = 4;
  std::size_t lstm_units = 64;
  std::size_t hidden_units = 64;
  double bn_momentum = 0.99;
  double bn_epsilon = 1e-5;
  std::size_t parameter_count = 0;  // trainable scalars

  bool operator==(const ArchitectureDescriptor&) const = default;
};

// Sequence lengths through the two conv/pool blocks.
struct ConvTrunkLengths {
  std::size_t conv1, pool1, conv2, pool2;
};

// Throws ShapeError naming the first stage that underflows.
ConvTrunkLengths conv_trunk_lengths(std::size_t input_length, std::size_t kernel_size = 3, std::size_t pool_size = 4);

// Validates the input length for `kind` and fills parameter_count from the
// closed-form count of each architecture.
ArchitectureDescriptor make_descriptor(ModelKind kind, std::size_t input_length);

void write_descriptor(ByteWriter& w, const ArchitectureDescriptor& d);
ArchitectureDescriptor read_descriptor(ByteReader& r);

template <typename T>
class Model {
 public:
  // Builds the layer stack and initialises parameters from `seed`.
  Model(const ArchitectureDescriptor& descriptor, std::uint64_t seed);

  const ArchitectureDescriptor& descriptor() const noexcept { return descriptor_; }

  // x (batch, F) -> logits (batch, classes).
  Tensor<T> forward(Tape<T>& tape, const Tensor<T>& x, Mode mode);

  // Trainable parameters followed by non-trainable state, in a fixed order.
  const std::vector<NamedTensor<T>>& named_tensors() const noexcept { return named_; }
  std::vector<Tensor<T>> parameters() const;
  std::size_t parameter_count() const;
  void zero_grad();

  // One line per layer: kind and output shape.
  std::vector<std::string> summary() const;

 private:
  ArchitectureDescriptor descriptor_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  std::vector<NamedTensor<T>> named_;
};

template <typename T> Model<T> build_dnn(std::size_t input_length, std::uint64_t seed);
template <typename T> Model<T> build_cnn(std::size_t input_length, std::uint64_t seed);
template <typename T> Model<T> build_lstm(std::size_t input_length, std::uint64_t seed);
template <typename T> Model<T> build_cnn_lstm(std::size_t input_length, std::uint64_t seed);

extern template class Model<float>;
extern template class Model<double>;

}  // namespace idsnet
