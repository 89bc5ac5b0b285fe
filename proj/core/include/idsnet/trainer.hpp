#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "idsnet/checkpoint.hpp"
#include "idsnet/models.hpp"
#include "idsnet/optimizer.hpp"
#include "idsnet/preprocess.hpp"
#include "idsnet/train_log.hpp"

namespace idsnet {

enum class Resampling : std::uint8_t { none = 0, upsample = 1, downsample = 2 };

std::string_view resampling_name(Resampling r);
std::optional<Resampling> resampling_from_name(std::string_view name);

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 500;
  double validation_fraction = 0.30;
  std::size_t eval_batch_size = 20;
  std::uint64_t seed = 42;
  OptimizerConfig optimizer;
  Precision precision = Precision::single;
  Resampling resampling = Resampling::none;
  bool record_step_losses = true;
  // When false, per-epoch seconds are logged as 0 so logs compare bitwise.
  bool record_timing = true;

  // Throws InputError naming the offending field.
  void validate() const;
};

struct ValidationSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// Uniform seeded split; the validation part has round(rows * fraction) rows.
// Both parts come back sorted.
ValidationSplit split_validation(std::size_t rows, double fraction, std::uint64_t seed);

// Rebalances `rows` to equal class counts, either by sampling minority
// classes with replacement up to the largest class or by subsampling every
// class to the smallest non-empty one. Result is sorted.
std::vector<std::size_t> resample_rows(std::span<const ClassLabel> labels, std::span<const std::size_t> rows,
                                       Resampling mode, std::uint64_t seed);

struct LossAccuracy {
  double loss = 0.0;  // mean categorical cross-entropy
  double accuracy = 0.0;
};

// Inference-mode loss and accuracy over `rows`, in batches. Each row's loss
// is accumulated in row order so the result does not depend on batch size.
template <typename T>
LossAccuracy evaluate_rows(Model<T>& model, const FeatureMatrix<T>& data, std::span<const std::size_t> rows,
                           std::size_t batch_size);

template <typename T>
struct TrainOutcome {
  Checkpoint best;  // parameters of the best validation epoch, full log
  TrainLog log;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Trains `model` in place and leaves it holding the best epoch's parameters.
// Throws NumericalError on a non-finite loss.
template <typename T>
TrainOutcome<T> train(Model<T>& model, const FeatureMatrix<T>& data, const PreprocessorState& preprocessor,
                      const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace idsnet
