#include "idsnet/trainer.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <chrono>
#include <cmath>
#include <string>

#include "idsnet/errors.hpp"
#include "idsnet/nn_ops.hpp"
#include "idsnet/random.hpp"

namespace idsnet {

namespace {

template <typename T>
std::size_t argmax_row(std::span<const T> row) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < row.size(); ++k)
    if (row[k] > row[best]) best = k;
  return best;
}

}  // namespace

std::string_view resampling_name(Resampling r) {
  switch (r) {
    case Resampling::none: return "none";
    case Resampling::upsample: return "upsample";
    case Resampling::downsample: return "downsample";
  }
  return "none";
}

std::optional<Resampling> resampling_from_name(std::string_view name) {
  if (name == "none") return Resampling::none;
  if (name == "upsample") return Resampling::upsample;
  if (name == "downsample") return Resampling::downsample;
  return std::nullopt;
}

void TrainConfig::validate() const {
  if (epochs == 0) throw InputError("epochs must be at least 1");
  if (batch_size < 2) throw InputError("batch size must be at least 2 (batch normalisation)");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw InputError("validation fraction must lie in (0, 1), got " + std::to_string(validation_fraction));
  if (eval_batch_size == 0) throw InputError("evaluation batch size must be at least 1");
  if (!(optimizer.learning_rate > 0.0) || !std::isfinite(optimizer.learning_rate))
    throw InputError("learning rate must be positive");
}

ValidationSplit split_validation(std::size_t rows, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw InputError("validation fraction must lie in (0, 1), got " + std::to_string(fraction));
  const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(rows) * fraction));
  auto order = iota_indices(rows);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  ValidationSplit split;
  split.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

std::vector<std::size_t> resample_rows(std::span<const ClassLabel> labels, std::span<const std::size_t> rows,
                                       Resampling mode, std::uint64_t seed) {
  std::vector<std::size_t> out(rows.begin(), rows.end());
  if (mode == Resampling::none) return out;
  std::array<std::vector<std::size_t>, kClassCount> by_class;
  for (auto r : rows) by_class[class_index(labels[r])].push_back(r);
  std::size_t largest = 0, smallest = SIZE_MAX;
  for (const auto& c : by_class) {
    if (c.empty()) continue;
    largest = std::max(largest, c.size());
    smallest = std::min(smallest, c.size());
  }
  Rng rng(seed);
  out.clear();
  for (auto& c : by_class) {
    if (c.empty()) continue;
    if (mode == Resampling::upsample) {
      out.insert(out.end(), c.begin(), c.end());
      for (std::size_t k = c.size(); k < largest; ++k) out.push_back(c[rng.below(c.size())]);
    } else {
      rng.shuffle(std::span<std::size_t>(c));
      out.insert(out.end(), c.begin(), c.begin() + static_cast<std::ptrdiff_t>(smallest));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

template <typename T>
LossAccuracy evaluate_rows(Model<T>& model, const FeatureMatrix<T>& data, std::span<const std::size_t> rows,
                           std::size_t batch_size) {
  if (rows.empty()) throw InputError("cannot evaluate an empty row set");
  if (batch_size == 0) throw InputError("evaluation batch size must be at least 1");
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < rows.size(); start += batch_size) {
    const auto chunk = rows.subspan(start, std::min(batch_size, rows.size() - start));
    Tape<T> tape(false);
    const auto logits = model.forward(tape, gather_rows(data, chunk), Mode::infer);
    const auto z = logits.values();
    const std::size_t K = logits.dim(1);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      const auto row = z.subspan(i * K, K);
      const std::size_t truth = class_index(data.labels[chunk[i]]);
      double m = static_cast<double>(row[0]);
      for (auto v : row) m = std::max(m, static_cast<double>(v));
      double s = 0.0;
      for (auto v : row) s += std::exp(static_cast<double>(v) - m);
      loss += m + std::log(s) - static_cast<double>(row[truth]);
      if (argmax_row(row) == truth) ++correct;
    }
  }
  const auto n = static_cast<double>(rows.size());
  return {loss / n, static_cast<double>(correct) / n};
}

template <typename T>
TrainOutcome<T> train(Model<T>& model, const FeatureMatrix<T>& data, const PreprocessorState& preprocessor,
                      const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (config.precision != precision_of<T>())
    throw InputError("training precision " + std::string(precision_name(config.precision)) +
                     " does not match the model's element type");
  if (data.rows != data.labels.size()) throw InputError("feature matrix rows and labels disagree");
  if (data.cols != model.descriptor().input_length)
    throw CompatibilityError("model expects " + std::to_string(model.descriptor().input_length) +
                             " features, data has " + std::to_string(data.cols));

  Rng streams(config.seed);
  const auto split = split_validation(data.rows, config.validation_fraction, streams.next());
  if (split.train.size() < 2 || split.validation.empty())
    throw InputError("dataset too small for a " + std::to_string(config.validation_fraction) + " validation split");
  auto train_rows = resample_rows(data.labels, split.train, config.resampling, streams.next());
  Rng shuffle_rng = streams.fork();

  auto params = model.parameters();
  OptimizerState<T> state;
  TrainLog log;
  TrainOutcome<T> outcome;
  double best_accuracy = -1.0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    shuffle_rng.shuffle(std::span<std::size_t>(train_rows));

    double loss_sum = 0.0;
    std::size_t correct = 0, seen = 0, step = 0;
    for (std::size_t start = 0; start < train_rows.size(); start += config.batch_size) {
      const std::size_t n = std::min(config.batch_size, train_rows.size() - start);
      if (n < 2) break;
      const auto batch = std::span<const std::size_t>(train_rows).subspan(start, n);
      ++step;

      Tape<T> tape;
      model.zero_grad();
      const auto logits = model.forward(tape, gather_rows(data, batch), Mode::train);
      auto result = ops::softmax_cross_entropy(tape, logits, one_hot_labels<T>(data.labels, batch));
      const double loss = static_cast<double>(result.loss.item());
      if (!std::isfinite(loss))
        throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch) + ", step " +
                             std::to_string(step) + " (batch of " + std::to_string(n) + " rows starting at shuffled position " +
                             std::to_string(start) + ")");
      tape.backward(result.loss);
      optimizer_step(std::span<Tensor<T>>(params), state, config.optimizer);

      const auto p = result.probabilities.values();
      for (std::size_t i = 0; i < n; ++i)
        if (argmax_row<T>(p.subspan(i * kClassCount, kClassCount)) == class_index(data.labels[batch[i]])) ++correct;
      loss_sum += loss * static_cast<double>(n);
      seen += n;
      if (config.record_step_losses) log.step_losses.push_back(loss);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(seen);
    rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(seen);
    const auto val = evaluate_rows(model, data, split.validation, config.eval_batch_size);
    rec.val_loss = val.loss;
    rec.val_accuracy = val.accuracy;
    if (!std::isfinite(rec.val_loss))
      throw NumericalError("non-finite validation loss after epoch " + std::to_string(epoch));
    if (config.record_timing)
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    log.epochs.push_back(rec);

    if (rec.val_accuracy > best_accuracy) {
      best_accuracy = rec.val_accuracy;
      log.best_epoch = epoch;
      outcome.best = make_checkpoint(model, preprocessor, config.optimizer, state, log);
    }
    if (on_epoch) on_epoch(rec);
  }

  outcome.best.log = log;
  outcome.log = log;
  restore_tensors(model, outcome.best);
  return outcome;
}

#define IDSNET_INSTANTIATE_TRAINER(T)                                                                              \
  template LossAccuracy evaluate_rows(Model<T>&, const FeatureMatrix<T>&, std::span<const std::size_t>, std::size_t); \
  template TrainOutcome<T> train(Model<T>&, const FeatureMatrix<T>&, const PreprocessorState&, const TrainConfig&,   \
                                 const EpochCallback&);

IDSNET_INSTANTIATE_TRAINER(float)
IDSNET_INSTANTIATE_TRAINER(double)

}  // namespace idsnet
