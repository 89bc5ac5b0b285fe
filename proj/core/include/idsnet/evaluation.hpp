#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idsnet/checkpoint.hpp"
#include "idsnet/kdd_ingest.hpp"
#include "idsnet/models.hpp"
#include "idsnet/preprocess.hpp"

namespace idsnet {

// cells[i][j]: samples of actual class j predicted as class i.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kClassCount>, kClassCount> cells{};

  std::uint64_t total() const;
  std::uint64_t predicted_total(std::size_t i) const;  // row sum
  std::uint64_t actual_total(std::size_t j) const;     // column sum
  std::uint64_t trace() const;

  bool operator==(const ConfusionMatrix&) const = default;
};

// Throws InputError on a length mismatch.
ConfusionMatrix confusion(std::span<const ClassLabel> truth, std::span<const ClassLabel> predicted);

// Throws InputError on an empty matrix.
double accuracy(const ConfusionMatrix& cm);

enum class Averaging : std::uint8_t { none, macro, weighted, micro };
// Throws InputError for anything but none, macro, weighted and micro.
Averaging parse_averaging(std::string_view name);

// A metric whose denominator is zero is reported as 0 with its flag set.
struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

struct MetricSummary {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct PrfResult {
  std::array<ClassMetrics, kClassCount> per_class;
  // Aggregate under the requested rule; zero for Averaging::none.
  MetricSummary aggregate;
  bool any_undefined = false;
};

PrfResult precision_recall_f1(const ConfusionMatrix& cm, Averaging averaging);

struct AucResult {
  std::array<double, kClassCount> per_class{};
  std::array<bool, kClassCount> defined{};
  double macro = 0.0;  // mean over defined classes
  bool any_undefined = false;
};

// One-vs-rest ROC AUC from the Mann-Whitney rank statistic with midranks for
// tied scores. `scores` is row-major (n, kClassCount).
AucResult auc(std::span<const ClassLabel> truth, std::span<const double> scores);

struct EvalReport {
  std::size_t samples = 0;
  ConfusionMatrix cm;
  double accuracy = 0.0;
  std::array<ClassMetrics, kClassCount> per_class;
  MetricSummary macro, weighted, micro;
  AucResult auc;
};

EvalReport make_report(std::span<const ClassLabel> truth, std::span<const ClassLabel> predicted,
                       std::span<const double> scores);

// Lowest index wins ties.
std::size_t argmax(std::span<const double> row);

// Inference-mode forward in batches; softmax scores and argmax predictions.
template <typename T>
EvalReport evaluate(Model<T>& model, const FeatureMatrix<T>& data, std::size_t batch_size);

// Builds the checkpoint's model and evaluates it. CompatibilityError when the
// checkpoint's input length differs from the matrix width.
template <typename T>
EvalReport evaluate_checkpoint(const Checkpoint& ckpt, const FeatureMatrix<T>& data, std::size_t batch_size);

// "key: value" lines with six decimals; stable key order.
std::string format_report(const EvalReport& report);
// Predicted rows by actual columns with a sum row and column.
std::string confusion_csv(const ConfusionMatrix& cm);

}  // namespace idsnet
