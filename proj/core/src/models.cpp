#include "idsnet/models.hpp"

#include "idsnet/errors.hpp"

namespace idsnet {

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::dnn: return "dnn";
    case ModelKind::cnn: return "cnn";
    case ModelKind::lstm: return "lstm";
    case ModelKind::cnn_lstm: return "cnn-lstm";
  }
  return "unknown";
}

std::optional<ModelKind> model_kind_from_name(std::string_view name) {
  if (name == "dnn") return ModelKind::dnn;
  if (name == "cnn") return ModelKind::cnn;
  if (name == "lstm") return ModelKind::lstm;
  if (name == "cnn-lstm" || name == "cnn_lstm") return ModelKind::cnn_lstm;
  return std::nullopt;
}

ConvTrunkLengths conv_trunk_lengths(std::size_t input_length, std::size_t kernel_size, std::size_t pool_size) {
  std::string trace = "F=" + std::to_string(input_length);
  auto fail = [&](const std::string& stage) {
    throw ShapeError("conv trunk underflows at " + stage + ": " + trace);
  };
  ConvTrunkLengths out{};
  if (input_length < kernel_size) fail("first convolution");
  out.conv1 = input_length - kernel_size + 1;
  trace += " -> " + std::to_string(out.conv1);
  if (out.conv1 < pool_size) fail("first pooling");
  out.pool1 = out.conv1 / pool_size;
  trace += " -> " + std::to_string(out.pool1);
  if (out.pool1 < kernel_size) fail("second convolution");
  out.conv2 = out.pool1 - kernel_size + 1;
  trace += " -> " + std::to_string(out.conv2);
  if (out.conv2 < pool_size) fail("second pooling");
  out.pool2 = out.conv2 / pool_size;
  return out;
}

ArchitectureDescriptor make_descriptor(ModelKind kind, std::size_t input_length) {
  ArchitectureDescriptor d;
  d.kind = kind;
  d.input_length = input_length;
  if (input_length == 0) throw ShapeError("model input length must be positive");
  const std::size_t K = d.kernel_size, Fl = d.filters, U = d.lstm_units, H = d.hidden_units, C = d.classes;
  auto lstm_params = [](std::size_t in, std::size_t units) { return 4 * units * (in + units) + 4 * units; };
  auto conv_trunk_params = [&] { return (K * 1 * Fl + Fl) + 2 * Fl + (K * Fl * Fl + Fl) + 2 * Fl; };
  switch (kind) {
    case ModelKind::dnn:
      d.parameter_count = (input_length * H + H) + (H * H + H) + (H * C + C);
      break;
    case ModelKind::cnn: {
      const auto lengths = conv_trunk_lengths(input_length, K, d.pool_size);
      d.parameter_count = conv_trunk_params() + (lengths.pool2 * Fl * C + C);
      break;
    }
    case ModelKind::lstm:
      d.parameter_count = lstm_params(1, U) + lstm_params(U, U) + (U * C + C);
      break;
    case ModelKind::cnn_lstm:
      conv_trunk_lengths(input_length, K, d.pool_size);
      d.parameter_count = conv_trunk_params() + lstm_params(Fl, U) + (U * C + C);
      break;
  }
  return d;
}

void write_descriptor(ByteWriter& w, const ArchitectureDescriptor& d) {
  w.u8(static_cast<std::uint8_t>(d.kind));
  w.u64(d.input_length);
  w.u64(d.classes);
  w.u64(d.filters);
  w.u64(d.kernel_size);
  w.u64(d.pool_size);
  w.u64(d.lstm_units);
  w.u64(d.hidden_units);
  w.f64(d.bn_momentum);
  w.f64(d.bn_epsilon);
  w.u64(d.parameter_count);
}

ArchitectureDescriptor read_descriptor(ByteReader& r) {
  ArchitectureDescriptor d;
  const auto kind = r.u8();
  if (kind > static_cast<std::uint8_t>(ModelKind::cnn_lstm)) throw FormatError("descriptor: unknown model kind");
  d.kind = static_cast<ModelKind>(kind);
  d.input_length = r.u64();
  d.classes = r.u64();
  d.filters = r.u64();
  d.kernel_size = r.u64();
  d.pool_size = r.u64();
  d.lstm_units = r.u64();
  d.hidden_units = r.u64();
  d.bn_momentum = r.f64();
  d.bn_epsilon = r.f64();
  d.parameter_count = r.u64();
  return d;
}

template <typename T>
Model<T>::Model(const ArchitectureDescriptor& descriptor, std::uint64_t seed) : descriptor_(descriptor) {
  const auto& d = descriptor_;
  const std::size_t F = d.input_length;
  const T momentum = static_cast<T>(d.bn_momentum), eps = static_cast<T>(d.bn_epsilon);
  auto add = [this](auto layer) { layers_.push_back(std::move(layer)); };
  auto conv_trunk = [&] {
    add(std::make_unique<Reshape<T>>(Shape{F, 1}));
    add(std::make_unique<Conv1D<T>>(1, d.filters, d.kernel_size));
    add(std::make_unique<BatchNorm<T>>(d.filters, momentum, eps));
    add(std::make_unique<ReLU<T>>());
    add(std::make_unique<MaxPool1D<T>>(d.pool_size));
    add(std::make_unique<Conv1D<T>>(d.filters, d.filters, d.kernel_size));
    add(std::make_unique<BatchNorm<T>>(d.filters, momentum, eps));
    add(std::make_unique<ReLU<T>>());
    add(std::make_unique<MaxPool1D<T>>(d.pool_size));
  };

  switch (d.kind) {
    case ModelKind::dnn:
      add(std::make_unique<Dense<T>>(F, d.hidden_units));
      add(std::make_unique<ReLU<T>>());
      add(std::make_unique<Dense<T>>(d.hidden_units, d.hidden_units));
      add(std::make_unique<ReLU<T>>());
      add(std::make_unique<Dense<T>>(d.hidden_units, d.classes));
      break;
    case ModelKind::cnn: {
      const auto lengths = conv_trunk_lengths(F, d.kernel_size, d.pool_size);
      conv_trunk();
      add(std::make_unique<Flatten<T>>());
      add(std::make_unique<Dense<T>>(lengths.pool2 * d.filters, d.classes));
      break;
    }
    case ModelKind::lstm:
      add(std::make_unique<Reshape<T>>(Shape{F, 1}));
      add(std::make_unique<LSTM<T>>(1, d.lstm_units, true));
      add(std::make_unique<LSTM<T>>(d.lstm_units, d.lstm_units, false));
      add(std::make_unique<Dense<T>>(d.lstm_units, d.classes));
      break;
    case ModelKind::cnn_lstm:
      conv_trunk_lengths(F, d.kernel_size, d.pool_size);
      conv_trunk();
      add(std::make_unique<LSTM<T>>(d.filters, d.lstm_units, false));
      add(std::make_unique<Dense<T>>(d.lstm_units, d.classes));
      break;
  }

  Rng rng(seed);
  std::vector<NamedTensor<T>> trainable, state;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i]->initialize(rng);
    std::vector<NamedTensor<T>> found;
    layers_[i]->collect(std::to_string(i) + "." + std::string(layers_[i]->kind()), found);
    for (auto& nt : found) (nt.trainable ? trainable : state).push_back(std::move(nt));
  }
  named_ = std::move(trainable);
  named_.insert(named_.end(), state.begin(), state.end());

  if (parameter_count() != d.parameter_count)
    throw Error("model: built " + std::to_string(parameter_count()) + " parameters, descriptor says " +
                std::to_string(d.parameter_count));
}

template <typename T>
Tensor<T> Model<T>::forward(Tape<T>& tape, const Tensor<T>& x, Mode mode) {
  if (x.rank() != 2 || x.dim(1) != descriptor_.input_length)
    throw CompatibilityError("model expects " + std::to_string(descriptor_.input_length) +
                             " features per row, input has shape " + shape_str(x.shape()));
  Tensor<T> h = x;
  for (auto& layer : layers_) h = layer->forward(tape, h, mode);
  return h;
}

template <typename T>
std::vector<Tensor<T>> Model<T>::parameters() const {
  std::vector<Tensor<T>> out;
  for (const auto& nt : named_)
    if (nt.trainable) out.push_back(nt.tensor);
  return out;
}

template <typename T>
std::size_t Model<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& nt : named_)
    if (nt.trainable) n += nt.tensor.size();
  return n;
}

template <typename T>
void Model<T>::zero_grad() {
  for (auto& nt : named_) nt.tensor.zero_grad();
}

template <typename T>
std::vector<std::string> Model<T>::summary() const {
  std::vector<std::string> out;
  Shape shape{descriptor_.input_length};
  for (const auto& layer : layers_) {
    shape = layer->output_shape(shape);
    out.push_back(std::string(layer->kind()) + " " + shape_str(shape));
  }
  return out;
}

template <typename T>
Model<T> build_dnn(std::size_t input_length, std::uint64_t seed) {
  return Model<T>(make_descriptor(ModelKind::dnn, input_length), seed);
}
template <typename T>
Model<T> build_cnn(std::size_t input_length, std::uint64_t seed) {
  return Model<T>(make_descriptor(ModelKind::cnn, input_length), seed);
}
template <typename T>
Model<T> build_lstm(std::size_t input_length, std::uint64_t seed) {
  return Model<T>(make_descriptor(ModelKind::lstm, input_length), seed);
}
template <typename T>
Model<T> build_cnn_lstm(std::size_t input_length, std::uint64_t seed) {
  return Model<T>(make_descriptor(ModelKind::cnn_lstm, input_length), seed);
}

template class Model<float>;
template class Model<double>;
template Model<float> build_dnn(std::size_t, std::uint64_t);
template Model<double> build_dnn(std::size_t, std::uint64_t);
template Model<float> build_cnn(std::size_t, std::uint64_t);
template Model<double> build_cnn(std::size_t, std::uint64_t);
template Model<float> build_lstm(std::size_t, std::uint64_t);
template Model<double> build_lstm(std::size_t, std::uint64_t);
template Model<float> build_cnn_lstm(std::size_t, std::uint64_t);
template Model<double> build_cnn_lstm(std::size_t, std::uint64_t);

}  // namespace idsnet
