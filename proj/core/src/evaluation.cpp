#include "idsnet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "idsnet/errors.hpp"

namespace idsnet {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (const auto& row : cells)
    for (auto v : row) t += v;
  return t;
}

std::uint64_t ConfusionMatrix::predicted_total(std::size_t i) const {
  return std::accumulate(cells[i].begin(), cells[i].end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::actual_total(std::size_t j) const {
  std::uint64_t t = 0;
  for (const auto& row : cells) t += row[j];
  return t;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < kClassCount; ++i) t += cells[i][i];
  return t;
}

ConfusionMatrix confusion(std::span<const ClassLabel> truth, std::span<const ClassLabel> predicted) {
  if (truth.size() != predicted.size())
    throw InputError("confusion: " + std::to_string(truth.size()) + " true labels but " +
                     std::to_string(predicted.size()) + " predictions");
  ConfusionMatrix cm;
  for (std::size_t n = 0; n < truth.size(); ++n) ++cm.cells[class_index(predicted[n])][class_index(truth[n])];
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw InputError("accuracy of an empty confusion matrix");
  return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

Averaging parse_averaging(std::string_view name) {
  if (name == "none") return Averaging::none;
  if (name == "macro") return Averaging::macro;
  if (name == "weighted") return Averaging::weighted;
  if (name == "micro") return Averaging::micro;
  throw InputError("unknown averaging rule '" + std::string(name) + "' (expected none, macro, weighted or micro)");
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den, bool& undefined) {
  undefined = den == 0;
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r, bool& undefined) {
  undefined = p + r == 0.0;
  return undefined ? 0.0 : 2.0 * p * r / (p + r);
}

}  // namespace

PrfResult precision_recall_f1(const ConfusionMatrix& cm, Averaging averaging) {
  PrfResult out;
  for (std::size_t i = 0; i < kClassCount; ++i) {
    auto& m = out.per_class[i];
    m.support = cm.actual_total(i);
    m.precision = ratio(cm.cells[i][i], cm.predicted_total(i), m.precision_undefined);
    m.recall = ratio(cm.cells[i][i], m.support, m.recall_undefined);
    m.f1 = harmonic(m.precision, m.recall, m.f1_undefined);
    out.any_undefined = out.any_undefined || m.precision_undefined || m.recall_undefined || m.f1_undefined;
  }
  switch (averaging) {
    case Averaging::none:
      break;
    case Averaging::macro:
      for (const auto& m : out.per_class) {
        out.aggregate.precision += m.precision / kClassCount;
        out.aggregate.recall += m.recall / kClassCount;
        out.aggregate.f1 += m.f1 / kClassCount;
      }
      break;
    case Averaging::weighted: {
      const auto total = static_cast<double>(cm.total());
      if (total == 0.0) {
        out.any_undefined = true;
        break;
      }
      for (const auto& m : out.per_class) {
        const double w = static_cast<double>(m.support) / total;
        out.aggregate.precision += w * m.precision;
        out.aggregate.recall += w * m.recall;
        out.aggregate.f1 += w * m.f1;
      }
      break;
    }
    case Averaging::micro: {
      // Pooled: every error is one false positive and one false negative.
      bool undefined = false;
      const double p = ratio(cm.trace(), cm.total(), undefined);
      bool f1_undefined = false;
      out.aggregate = {p, p, harmonic(p, p, f1_undefined)};
      out.any_undefined = out.any_undefined || undefined;
      break;
    }
  }
  return out;
}

AucResult auc(std::span<const ClassLabel> truth, std::span<const double> scores) {
  const std::size_t n = truth.size();
  if (scores.size() != n * kClassCount)
    throw InputError("auc: expected " + std::to_string(n * kClassCount) + " scores, got " +
                     std::to_string(scores.size()));
  AucResult out;
  std::vector<std::size_t> order(n);
  std::vector<double> rank(n);
  std::size_t defined = 0;
  for (std::size_t k = 0; k < kClassCount; ++k) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a * kClassCount + k] < scores[b * kClassCount + k]; });
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j + 1 < n && scores[order[j + 1] * kClassCount + k] == scores[order[i] * kClassCount + k]) ++j;
      const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t t = i; t <= j; ++t) rank[order[t]] = mid;
      i = j + 1;
    }
    double positives = 0.0, rank_sum = 0.0;
    for (std::size_t r = 0; r < n; ++r)
      if (class_index(truth[r]) == k) {
        positives += 1.0;
        rank_sum += rank[r];
      }
    const double negatives = static_cast<double>(n) - positives;
    if (positives == 0.0 || negatives == 0.0) {
      out.any_undefined = true;
      continue;
    }
    out.defined[k] = true;
    out.per_class[k] = (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
    out.macro += out.per_class[k];
    ++defined;
  }
  if (defined) out.macro /= static_cast<double>(defined);
  return out;
}

std::size_t argmax(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < row.size(); ++k)
    if (row[k] > row[best]) best = k;
  return best;
}

EvalReport make_report(std::span<const ClassLabel> truth, std::span<const ClassLabel> predicted,
                       std::span<const double> scores) {
  EvalReport r;
  r.samples = truth.size();
  r.cm = confusion(truth, predicted);
  r.accuracy = accuracy(r.cm);
  const auto macro = precision_recall_f1(r.cm, Averaging::macro);
  r.per_class = macro.per_class;
  r.macro = macro.aggregate;
  r.weighted = precision_recall_f1(r.cm, Averaging::weighted).aggregate;
  r.micro = precision_recall_f1(r.cm, Averaging::micro).aggregate;
  r.auc = auc(truth, scores);
  return r;
}

template <typename T>
EvalReport evaluate(Model<T>& model, const FeatureMatrix<T>& data, std::size_t batch_size) {
  if (batch_size == 0) throw InputError("evaluation batch size must be at least 1");
  if (data.rows == 0) throw InputError("cannot evaluate an empty dataset");
  if (data.cols != model.descriptor().input_length)
    throw CompatibilityError("model expects " + std::to_string(model.descriptor().input_length) +
                             " features, data has " + std::to_string(data.cols));
  std::vector<double> scores(data.rows * kClassCount);
  std::vector<ClassLabel> predicted(data.rows);
  std::vector<std::size_t> rows(batch_size);
  for (std::size_t start = 0; start < data.rows; start += batch_size) {
    const std::size_t n = std::min(batch_size, data.rows - start);
    rows.resize(n);
    std::iota(rows.begin(), rows.end(), start);
    Tape<T> tape(false);
    const auto logits = model.forward(tape, gather_rows(data, rows), Mode::infer);
    const auto z = logits.values();
    for (std::size_t i = 0; i < n; ++i) {
      const auto out = std::span<double>(scores).subspan((start + i) * kClassCount, kClassCount);
      double m = -INFINITY;
      for (std::size_t k = 0; k < kClassCount; ++k) m = std::max(m, static_cast<double>(z[i * kClassCount + k]));
      double s = 0.0;
      for (std::size_t k = 0; k < kClassCount; ++k) s += out[k] = std::exp(static_cast<double>(z[i * kClassCount + k]) - m);
      for (auto& v : out) v /= s;
      std::array<double, kClassCount> raw;
      for (std::size_t k = 0; k < kClassCount; ++k) raw[k] = static_cast<double>(z[i * kClassCount + k]);
      predicted[start + i] = kAllClasses[argmax(raw)];
    }
  }
  return make_report(data.labels, predicted, scores);
}

template <typename T>
EvalReport evaluate_checkpoint(const Checkpoint& ckpt, const FeatureMatrix<T>& data, std::size_t batch_size) {
  if (ckpt.descriptor.input_length != data.cols)
    throw CompatibilityError("checkpoint expects " + std::to_string(ckpt.descriptor.input_length) +
                             " features, data has " + std::to_string(data.cols));
  auto model = model_from_checkpoint<T>(ckpt);
  return evaluate(model, data, batch_size);
}

std::string format_report(const EvalReport& r) {
  std::string out;
  char buf[160];
  auto line = [&](const std::string& key, double v) {
    std::snprintf(buf, sizeof buf, "%s: %.6f\n", key.c_str(), v);
    out += buf;
  };
  auto count = [&](const std::string& key, std::uint64_t v) {
    out += key + ": " + std::to_string(v) + "\n";
  };
  count("samples", r.samples);
  line("accuracy", r.accuracy);
  const std::array<std::pair<const char*, const MetricSummary*>, 3> rules{
      {{"macro", &r.macro}, {"weighted", &r.weighted}, {"micro", &r.micro}}};
  for (const auto& [name, m] : rules) {
    line(std::string("precision_") + name, m->precision);
    line(std::string("recall_") + name, m->recall);
    line(std::string("f1_") + name, m->f1);
  }
  line("auc_macro", r.auc.macro);
  std::string undefined;
  for (std::size_t k = 0; k < kClassCount; ++k) {
    const std::string prefix = "class." + std::string(class_name(kAllClasses[k])) + ".";
    const auto& m = r.per_class[k];
    line(prefix + "precision", m.precision);
    line(prefix + "recall", m.recall);
    line(prefix + "f1", m.f1);
    if (r.auc.defined[k]) line(prefix + "auc", r.auc.per_class[k]);
    else out += prefix + "auc: undefined\n";
    count(prefix + "support", m.support);
    auto flag = [&](bool f, const char* what) {
      if (!f) return;
      if (!undefined.empty()) undefined += ",";
      undefined += prefix + what;
    };
    flag(m.precision_undefined, "precision");
    flag(m.recall_undefined, "recall");
    flag(m.f1_undefined, "f1");
    flag(!r.auc.defined[k], "auc");
  }
  for (std::size_t i = 0; i < kClassCount; ++i)
    for (std::size_t j = 0; j < kClassCount; ++j)
      count("confusion." + std::string(class_name(kAllClasses[i])) + "." + std::string(class_name(kAllClasses[j])),
            r.cm.cells[i][j]);
  out += "zero_denominator: " + (undefined.empty() ? std::string("none") : undefined) + "\n";
  return out;
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::string out = "predicted\\actual";
  for (auto c : kAllClasses) out += "," + std::string(class_name(c));
  out += ",sum\n";
  for (std::size_t i = 0; i < kClassCount; ++i) {
    out += class_name(kAllClasses[i]);
    for (std::size_t j = 0; j < kClassCount; ++j) out += "," + std::to_string(cm.cells[i][j]);
    out += "," + std::to_string(cm.predicted_total(i)) + "\n";
  }
  out += "sum";
  for (std::size_t j = 0; j < kClassCount; ++j) out += "," + std::to_string(cm.actual_total(j));
  out += "," + std::to_string(cm.total()) + "\n";
  return out;
}

template EvalReport evaluate(Model<float>&, const FeatureMatrix<float>&, std::size_t);
template EvalReport evaluate(Model<double>&, const FeatureMatrix<double>&, std::size_t);
template EvalReport evaluate_checkpoint(const Checkpoint&, const FeatureMatrix<float>&, std::size_t);
template EvalReport evaluate_checkpoint(const Checkpoint&, const FeatureMatrix<double>&, std::size_t);

}  // namespace idsnet
