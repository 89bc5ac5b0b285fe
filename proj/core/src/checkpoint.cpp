#include "idsnet/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <cstring>

#include "idsnet/digest.hpp"
#include "idsnet/errors.hpp"

namespace idsnet {

namespace {

constexpr std::array<char, 8> kMagic{'I', 'D', 'S', 'C', 'K', 'P', 'T', '\0'};
constexpr std::array<std::string_view, 5> kSections{"descriptor", "preprocessor", "parameters", "optimizer", "log"};

void write_tensors(ByteWriter& w, const std::vector<StoredTensor>& tensors, Precision precision) {
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    w.str(t.name);
    w.u8(t.trainable ? 1 : 0);
    w.u8(static_cast<std::uint8_t>(t.shape.size()));
    for (auto d : t.shape) w.u64(d);
    if (t.values.size() != shape_size(t.shape))
      throw ShapeError("checkpoint: tensor " + t.name + " holds " + std::to_string(t.values.size()) +
                       " values for shape " + shape_str(t.shape));
    for (double v : t.values) {
      if (precision == Precision::single)
        w.f32(static_cast<float>(v));
      else
        w.f64(v);
    }
  }
}

std::vector<StoredTensor> read_tensors(ByteReader& r, Precision precision) {
  std::vector<StoredTensor> out(r.u32());
  for (auto& t : out) {
    t.name = r.str();
    t.trainable = r.u8() != 0;
    t.shape.resize(r.u8());
    for (auto& d : t.shape) d = r.u64();
    const std::size_t width = precision == Precision::single ? 4 : 8;
    const std::size_t n = shape_size(t.shape);
    if (n > r.remaining() / width) throw FormatError("checkpoint: tensor " + t.name + " extends past its section");
    t.values.resize(n);
    for (double& v : t.values) v = precision == Precision::single ? static_cast<double>(r.f32()) : r.f64();
  }
  return out;
}

std::vector<std::byte> section_payload(const Checkpoint& c, std::string_view name) {
  ByteWriter w;
  if (name == "descriptor") {
    write_descriptor(w, c.descriptor);
  } else if (name == "preprocessor") {
    write_preprocessor(w, c.preprocessor);
  } else if (name == "parameters") {
    w.u8(static_cast<std::uint8_t>(c.precision));
    write_tensors(w, c.tensors, c.precision);
  } else if (name == "optimizer") {
    w.u8(static_cast<std::uint8_t>(c.optimizer.kind));
    w.f64(c.optimizer.learning_rate);
    w.f64(c.optimizer.beta1);
    w.f64(c.optimizer.beta2);
    w.f64(c.optimizer.epsilon);
    w.u64(c.optimizer_step);
    write_tensors(w, c.first_moments, c.precision);
    write_tensors(w, c.second_moments, c.precision);
  } else {
    w.u32(static_cast<std::uint32_t>(c.log.epochs.size()));
    for (const auto& e : c.log.epochs) {
      w.u64(e.epoch);
      w.f64(e.train_loss);
      w.f64(e.train_accuracy);
      w.f64(e.val_loss);
      w.f64(e.val_accuracy);
      w.f64(e.seconds);
    }
    w.u64(c.log.best_epoch);
    w.u64(c.log.step_losses.size());
    for (double v : c.log.step_losses) w.f64(v);
  }
  return std::move(w).take();
}

void read_section(Checkpoint& c, std::string_view name, ByteReader& r) {
  if (name == "descriptor") {
    c.descriptor = read_descriptor(r);
  } else if (name == "preprocessor") {
    c.preprocessor = read_preprocessor(r);
  } else if (name == "parameters") {
    const auto p = r.u8();
    if (p > 1) throw FormatError("checkpoint: unknown precision tag " + std::to_string(p));
    c.precision = static_cast<Precision>(p);
    c.tensors = read_tensors(r, c.precision);
  } else if (name == "optimizer") {
    const auto k = r.u8();
    if (k > 1) throw FormatError("checkpoint: unknown optimizer tag " + std::to_string(k));
    c.optimizer.kind = static_cast<OptimizerKind>(k);
    c.optimizer.learning_rate = r.f64();
    c.optimizer.beta1 = r.f64();
    c.optimizer.beta2 = r.f64();
    c.optimizer.epsilon = r.f64();
    c.optimizer_step = r.u64();
    c.first_moments = read_tensors(r, c.precision);
    c.second_moments = read_tensors(r, c.precision);
  } else {
    c.log.epochs.resize(r.u32());
    for (auto& e : c.log.epochs) {
      e.epoch = r.u64();
      e.train_loss = r.f64();
      e.train_accuracy = r.f64();
      e.val_loss = r.f64();
      e.val_accuracy = r.f64();
      e.seconds = r.f64();
    }
    c.log.best_epoch = r.u64();
    const auto n = r.u64();
    if (n > r.remaining() / 8) throw FormatError("checkpoint: step loss trace extends past its section");
    c.log.step_losses.resize(n);
    for (double& v : c.log.step_losses) v = r.f64();
  }
  r.expect_done();
}

}  // namespace

std::string_view precision_name(Precision p) { return p == Precision::single ? "single" : "double"; }

std::optional<Precision> precision_from_name(std::string_view name) {
  if (name == "single" || name == "float32") return Precision::single;
  if (name == "double" || name == "float64") return Precision::dual;
  return std::nullopt;
}

std::vector<std::byte> encode_checkpoint(const Checkpoint& ckpt) {
  std::vector<std::vector<std::byte>> payloads;
  for (auto name : kSections) payloads.push_back(section_payload(ckpt, name));

  std::size_t header = kMagic.size() + 4 + 4;
  for (auto name : kSections) header += 2 + name.size() + 8 + 8 + 32;

  ByteWriter w;
  w.raw(std::string_view(kMagic.data(), kMagic.size()));
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(kSections.size()));
  std::size_t offset = header;
  for (std::size_t s = 0; s < kSections.size(); ++s) {
    w.str(kSections[s]);
    w.u64(offset);
    w.u64(payloads[s].size());
    w.raw(sha256(payloads[s]));
    offset += payloads[s].size();
  }
  for (const auto& p : payloads) w.raw(p);
  const auto trailer = sha256(w.bytes());
  w.raw(trailer);
  return std::move(w).take();
}

Checkpoint decode_checkpoint(std::span<const std::byte> bytes, const std::string& context) {
  if (bytes.size() < kMagic.size() + 8 + 32) throw FormatError(context + ": truncated checkpoint");
  if (std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0)
    throw FormatError(context + ": not a checkpoint file");
  ByteReader head(bytes.subspan(kMagic.size()), context);
  const auto version = head.u32();
  if (version != kCheckpointVersion)
    throw CompatibilityError(context + ": checkpoint format version " + std::to_string(version) +
                             ", this build reads version " + std::to_string(kCheckpointVersion));

  const auto body = bytes.first(bytes.size() - 32);
  const auto digest = sha256(body);
  if (!std::equal(digest.begin(), digest.end(), bytes.end() - 32))
    throw FormatError(context + ": checkpoint digest mismatch (file corrupted or truncated)");

  const auto count = head.u32();
  Checkpoint c;
  std::vector<bool> seen(kSections.size(), false);
  for (std::uint32_t s = 0; s < count; ++s) {
    const auto name = head.str();
    const auto offset = head.u64();
    const auto length = head.u64();
    const auto stored = head.raw(32);
    if (offset > body.size() || length > body.size() - offset)
      throw FormatError(context + ": section " + name + " lies outside the file");
    const auto payload = body.subspan(offset, length);
    const auto actual = sha256(payload);
    if (!std::equal(actual.begin(), actual.end(), stored.begin()))
      throw FormatError(context + ": section " + name + " digest mismatch");
    const auto it = std::find(kSections.begin(), kSections.end(), name);
    if (it == kSections.end()) continue;  // sections from newer minor revisions
    const auto idx = static_cast<std::size_t>(it - kSections.begin());
    if (seen[idx]) throw FormatError(context + ": duplicate section " + name);
    seen[idx] = true;
    ByteReader r(payload, context + " [" + name + "]");
    read_section(c, name, r);
  }
  for (std::size_t s = 0; s < kSections.size(); ++s)
    if (!seen[s]) throw FormatError(context + ": missing section " + std::string(kSections[s]));
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_file_atomic(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file_bytes(path), path.string());
}

template <typename T>
std::vector<StoredTensor> store_tensors(const std::vector<NamedTensor<T>>& tensors) {
  std::vector<StoredTensor> out;
  out.reserve(tensors.size());
  for (const auto& nt : tensors) {
    StoredTensor s{nt.name, nt.tensor.shape(), nt.trainable, {}};
    s.values.assign(nt.tensor.values().begin(), nt.tensor.values().end());
    out.push_back(std::move(s));
  }
  return out;
}

template <typename T>
Checkpoint make_checkpoint(const Model<T>& model, const PreprocessorState& preprocessor,
                           const OptimizerConfig& optimizer, const OptimizerState<T>& state, const TrainLog& log) {
  Checkpoint c;
  c.descriptor = model.descriptor();
  c.preprocessor = preprocessor;
  c.precision = precision_of<T>();
  c.tensors = store_tensors(model.named_tensors());
  c.optimizer = optimizer;
  c.optimizer_step = state.step;
  std::vector<NamedTensor<T>> m, v;
  std::size_t k = 0;
  for (const auto& nt : model.named_tensors()) {
    if (!nt.trainable) continue;
    if (k < state.first_moment.size()) {
      m.push_back({nt.name, state.first_moment[k], true});
      v.push_back({nt.name, state.second_moment[k], true});
    }
    ++k;
  }
  c.first_moments = store_tensors(m);
  c.second_moments = store_tensors(v);
  c.log = log;
  return c;
}

template <typename T>
void restore_tensors(Model<T>& model, const Checkpoint& ckpt) {
  if (ckpt.precision != precision_of<T>())
    throw CompatibilityError("checkpoint stores " + std::string(precision_name(ckpt.precision)) +
                             " precision tensors, the model uses " + std::string(precision_name(precision_of<T>())));
  const auto& named = model.named_tensors();
  if (named.size() != ckpt.tensors.size())
    throw CompatibilityError("checkpoint holds " + std::to_string(ckpt.tensors.size()) + " tensors, the model has " +
                             std::to_string(named.size()));
  for (std::size_t i = 0; i < named.size(); ++i) {
    const auto& s = ckpt.tensors[i];
    if (s.name != named[i].name || s.shape != named[i].tensor.shape())
      throw CompatibilityError("checkpoint tensor " + s.name + " " + shape_str(s.shape) + " does not match model tensor " +
                               named[i].name + " " + shape_str(named[i].tensor.shape()));
  }
  for (std::size_t i = 0; i < named.size(); ++i) {
    Tensor<T> handle = named[i].tensor;
    auto dst = handle.values();
    std::transform(ckpt.tensors[i].values.begin(), ckpt.tensors[i].values.end(), dst.begin(),
                   [](double v) { return static_cast<T>(v); });
  }
}

template <typename T>
Model<T> model_from_checkpoint(const Checkpoint& ckpt) {
  Model<T> model(ckpt.descriptor, 0);
  restore_tensors(model, ckpt);
  return model;
}

#define IDSNET_INSTANTIATE_CHECKPOINT(T)                                                                        \
  template std::vector<StoredTensor> store_tensors(const std::vector<NamedTensor<T>>&);                        \
  template Checkpoint make_checkpoint(const Model<T>&, const PreprocessorState&, const OptimizerConfig&,      \
                                      const OptimizerState<T>&, const TrainLog&);                              \
  template void restore_tensors(Model<T>&, const Checkpoint&);                                                 \
  template Model<T> model_from_checkpoint(const Checkpoint&);

IDSNET_INSTANTIATE_CHECKPOINT(float)
IDSNET_INSTANTIATE_CHECKPOINT(double)

}  // namespace idsnet
