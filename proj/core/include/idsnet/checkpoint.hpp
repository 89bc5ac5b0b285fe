#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idsnet/models.hpp"
#include "idsnet/optimizer.hpp"
#include "idsnet/preprocess.hpp"
#include "idsnet/train_log.hpp"

namespace idsnet {

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class Precision : std::uint8_t { single = 0, dual = 1 };

std::string_view precision_name(Precision p);
std::optional<Precision> precision_from_name(std::string_view name);
template <typename T>
constexpr Precision precision_of() {
  return sizeof(T) == sizeof(float) ? Precision::single : Precision::dual;
}

// Tensor values widened to double. Values of a single-precision checkpoint
// are exactly representable, so the round trip stays bitwise.
struct StoredTensor {
  std::string name;
  Shape shape;
  bool trainable = true;
  std::vector<double> values;

  bool operator==(const StoredTensor&) const = default;
};

struct Checkpoint {
  ArchitectureDescriptor descriptor;
  PreprocessorState preprocessor;
  Precision precision = Precision::single;
  std::vector<StoredTensor> tensors;
  OptimizerConfig optimizer;
  std::uint64_t optimizer_step = 0;
  std::vector<StoredTensor> first_moments;
  std::vector<StoredTensor> second_moments;
  TrainLog log;

  bool operator==(const Checkpoint&) const = default;
};

// Layout: magic "IDSCKPT\0", u32 version, u32 section count, then per section
// (name, u64 offset, u64 length, SHA-256 of the payload), the payloads, and a
// SHA-256 of everything before it.
std::vector<std::byte> encode_checkpoint(const Checkpoint& ckpt);
// FormatError on truncation, digest mismatch or malformed sections;
// CompatibilityError on a foreign format version.
Checkpoint decode_checkpoint(std::span<const std::byte> bytes, const std::string& context = "checkpoint");

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

template <typename T>
Checkpoint make_checkpoint(const Model<T>& model, const PreprocessorState& preprocessor,
                           const OptimizerConfig& optimizer, const OptimizerState<T>& state, const TrainLog& log);

template <typename T>
std::vector<StoredTensor> store_tensors(const std::vector<NamedTensor<T>>& tensors);

// Copies the stored tensors into `model`. Names, order and shapes must match
// (CompatibilityError otherwise).
template <typename T>
void restore_tensors(Model<T>& model, const Checkpoint& ckpt);

// Rebuilds the model described by the checkpoint with its stored tensors.
// Throws CompatibilityError when the checkpoint precision differs from T.
template <typename T>
Model<T> model_from_checkpoint(const Checkpoint& ckpt);

}  // namespace idsnet
