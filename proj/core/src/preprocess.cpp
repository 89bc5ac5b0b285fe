#include "idsnet/preprocess.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <unordered_map>

#include "idsnet/errors.hpp"
#include "idsnet/parallel.hpp"

namespace idsnet {

namespace {

const std::string& category(const RawRecord& r, std::size_t which) {
  return which == 0 ? r.protocol_type : which == 1 ? r.service : r.flag;
}

using Lookup = std::array<std::unordered_map<std::string, std::size_t>, kCategoricalColumnCount>;

Lookup make_lookup(const PreprocessorState& state) {
  Lookup lookup;
  for (std::size_t k = 0; k < kCategoricalColumnCount; ++k)
    for (std::size_t i = 0; i < state.vocabularies[k].size(); ++i) lookup[k].emplace(state.vocabularies[k][i], i);
  return lookup;
}

// Imputed, unscaled feature row. Returns the number of unseen categories.
std::size_t raw_row(const PreprocessorState& state, const Lookup& lookup,
                    const std::array<std::size_t, kCategoricalColumnCount>& offsets, const RawRecord& r,
                    std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t c = 0; c < kNumericColumnCount; ++c)
    out[c] = std::isnan(r.numeric[c]) ? state.imputation[c] : r.numeric[c];
  std::size_t unseen = 0;
  for (std::size_t k = 0; k < kCategoricalColumnCount; ++k) {
    const auto it = lookup[k].find(category(r, k));
    if (it == lookup[k].end())
      ++unseen;
    else
      out[offsets[k] + it->second] = 1.0;
  }
  return unseen;
}

}  // namespace

std::size_t PreprocessorState::feature_length() const {
  if (!fitted) throw InputError("preprocessor has not been fitted");
  std::size_t n = kNumericColumnCount;
  for (const auto& v : vocabularies) n += v.size();
  return n;
}

std::array<std::size_t, kCategoricalColumnCount> PreprocessorState::block_offsets() const {
  std::array<std::size_t, kCategoricalColumnCount> out{};
  std::size_t offset = kNumericColumnCount;
  for (std::size_t k = 0; k < kCategoricalColumnCount; ++k) {
    out[k] = offset;
    offset += vocabularies[k].size();
  }
  return out;
}

PreprocessorState fit_preprocessor(const Dataset& train, const PreprocessorOptions& options) {
  if (train.empty()) throw InputError("cannot fit the preprocessor on an empty dataset");
  PreprocessorState state;
  state.options = options;

  for (std::size_t k = 0; k < kCategoricalColumnCount; ++k) {
    std::unordered_map<std::string, std::size_t> seen;
    for (const auto& r : train.records()) {
      const auto& v = category(r, k);
      if (seen.emplace(v, seen.size()).second) state.vocabularies[k].push_back(v);
    }
  }

  state.imputation.assign(kNumericColumnCount, 0.0);
  for (std::size_t c = 0; c < kNumericColumnCount; ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : train.records())
      if (!std::isnan(r.numeric[c])) {
        sum += r.numeric[c];
        ++n;
      }
    state.imputation[c] = n ? sum / static_cast<double>(n) : 0.0;
  }
  state.fitted = true;

  const std::size_t F = state.feature_length();
  const std::size_t scaled = options.scale_onehot ? F : kNumericColumnCount;
  const auto lookup = make_lookup(state);
  const auto offsets = state.block_offsets();
  const double N = static_cast<double>(train.size());

  // Two passes (mean, then centred second moment) in row order.
  std::vector<double> row(F), sum(scaled, 0.0), sq(scaled, 0.0);
  for (const auto& r : train.records()) {
    raw_row(state, lookup, offsets, r, row);
    for (std::size_t c = 0; c < scaled; ++c) sum[c] += row[c];
  }
  state.means.resize(scaled);
  for (std::size_t c = 0; c < scaled; ++c) state.means[c] = sum[c] / N;
  for (const auto& r : train.records()) {
    raw_row(state, lookup, offsets, r, row);
    for (std::size_t c = 0; c < scaled; ++c) {
      const double d = row[c] - state.means[c];
      sq[c] += d * d;
    }
  }
  state.stds.resize(scaled);
  state.zero_variance.resize(scaled);
  for (std::size_t c = 0; c < scaled; ++c) {
    state.stds[c] = std::sqrt(sq[c] / N);
    state.zero_variance[c] = state.stds[c] < options.zero_variance_epsilon;
  }
  return state;
}

template <typename T>
FeatureMatrix<T> transform(const PreprocessorState& state, const Dataset& ds) {
  const std::size_t F = state.feature_length();
  FeatureMatrix<T> m;
  m.rows = ds.size();
  m.cols = F;
  m.values.resize(m.rows * F);
  m.labels = ds.labels();

  const auto lookup = make_lookup(state);
  const auto offsets = state.block_offsets();
  std::atomic<std::size_t> unseen{0};
  parallel_for(
      m.rows,
      [&](std::size_t begin, std::size_t end) {
        std::vector<double> row(F);
        std::size_t local = 0;
        for (std::size_t i = begin; i < end; ++i) {
          local += raw_row(state, lookup, offsets, ds.records()[i], row);
          for (std::size_t c = 0; c < state.standardised_columns(); ++c)
            row[c] = state.zero_variance[c] ? 0.0 : (row[c] - state.means[c]) / state.stds[c];
          std::transform(row.begin(), row.end(), m.values.begin() + static_cast<std::ptrdiff_t>(i * F),
                         [](double v) { return static_cast<T>(v); });
        }
        unseen += local;
      },
      1024);
  m.unseen_categories = unseen;
  return m;
}

template <typename T>
Tensor<T> gather_rows(const FeatureMatrix<T>& m, std::span<const std::size_t> rows) {
  Tensor<T> out({rows.size(), m.cols});
  auto ov = out.values();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = m.row(rows[i]);
    std::copy(src.begin(), src.end(), ov.begin() + static_cast<std::ptrdiff_t>(i * m.cols));
  }
  return out;
}

template <typename T>
Tensor<T> one_hot_labels(std::span<const ClassLabel> labels, std::span<const std::size_t> rows) {
  Tensor<T> out({rows.size(), kClassCount});
  auto ov = out.values();
  for (std::size_t i = 0; i < rows.size(); ++i) ov[i * kClassCount + class_index(labels[rows[i]])] = T{1};
  return out;
}

void write_preprocessor(ByteWriter& w, const PreprocessorState& state) {
  if (!state.fitted) throw InputError("cannot serialise an unfitted preprocessor");
  w.u8(state.options.scale_onehot ? 1 : 0);
  w.f64(state.options.zero_variance_epsilon);
  w.u32(static_cast<std::uint32_t>(kNumericColumnCount));
  for (auto name : numeric_column_names()) w.str(name);
  for (const auto& vocab : state.vocabularies) {
    w.u32(static_cast<std::uint32_t>(vocab.size()));
    for (const auto& v : vocab) w.str(v);
  }
  for (double v : state.imputation) w.f64(v);
  w.u32(static_cast<std::uint32_t>(state.means.size()));
  for (std::size_t c = 0; c < state.means.size(); ++c) {
    w.f64(state.means[c]);
    w.f64(state.stds[c]);
    w.u8(state.zero_variance[c] ? 1 : 0);
  }
  w.u64(state.feature_length());
}

PreprocessorState read_preprocessor(ByteReader& r) {
  PreprocessorState s;
  s.options.scale_onehot = r.u8() != 0;
  s.options.zero_variance_epsilon = r.f64();
  if (r.u32() != kNumericColumnCount) throw FormatError("preprocessor: unexpected numeric column count");
  for (auto name : numeric_column_names())
    if (r.str() != name) throw FormatError("preprocessor: numeric column roles differ from this build");
  for (auto& vocab : s.vocabularies) {
    vocab.resize(r.u32());
    for (auto& v : vocab) v = r.str();
  }
  s.imputation.resize(kNumericColumnCount);
  for (double& v : s.imputation) v = r.f64();
  const auto scaled = r.u32();
  s.means.resize(scaled);
  s.stds.resize(scaled);
  s.zero_variance.resize(scaled);
  for (std::size_t c = 0; c < scaled; ++c) {
    s.means[c] = r.f64();
    s.stds[c] = r.f64();
    s.zero_variance[c] = r.u8() != 0;
  }
  s.fitted = true;
  const auto F = r.u64();
  if (F != s.feature_length()) throw FormatError("preprocessor: stored feature length disagrees with vocabularies");
  if (scaled != (s.options.scale_onehot ? F : kNumericColumnCount))
    throw FormatError("preprocessor: scaling table has the wrong length");
  return s;
}

template FeatureMatrix<float> transform(const PreprocessorState&, const Dataset&);
template FeatureMatrix<double> transform(const PreprocessorState&, const Dataset&);
template Tensor<float> gather_rows(const FeatureMatrix<float>&, std::span<const std::size_t>);
template Tensor<double> gather_rows(const FeatureMatrix<double>&, std::span<const std::size_t>);
template Tensor<float> one_hot_labels(std::span<const ClassLabel>, std::span<const std::size_t>);
template Tensor<double> one_hot_labels(std::span<const ClassLabel>, std::span<const std::size_t>);

}  // namespace idsnet
