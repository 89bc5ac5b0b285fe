#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "idsnet/bytes.hpp"
#include "idsnet/kdd_ingest.hpp"
#include "idsnet/tensor.hpp"

namespace idsnet {

inline constexpr std::size_t kCategoricalColumnCount = 3;  // protocol_type, service, flag

struct PreprocessorOptions {
  // Also standardise the one-hot columns with their training mean/std.
  bool scale_onehot = false;
  // Columns whose training std falls below this are mapped to 0.
  double zero_variance_epsilon = 1e-12;

  bool operator==(const PreprocessorOptions&) const = default;
};

// Fitted feature pipeline: mean imputation, z-scoring of the 38 numeric
// columns and one-hot encoding of protocol_type, service and flag.
//
// Feature layout: the numeric columns in file order, then the protocol,
// service and flag one-hot blocks, each in first-appearance order of the
// training data.
struct PreprocessorState {
  bool fitted = false;
  PreprocessorOptions options;
  std::array<std::vector<std::string>, kCategoricalColumnCount> vocabularies;
  std::vector<double> imputation;  // per numeric column
  std::vector<double> means;       // per output column that is standardised
  std::vector<double> stds;
  std::vector<bool> zero_variance;

  // Throws InputError when the state has not been fitted.
  std::size_t feature_length() const;
  // Offset of each one-hot block within a feature row.
  std::array<std::size_t, kCategoricalColumnCount> block_offsets() const;
  std::size_t standardised_columns() const { return means.size(); }

  bool operator==(const PreprocessorState&) const = default;
};

// Throws InputError on an empty dataset.
PreprocessorState fit_preprocessor(const Dataset& train, const PreprocessorOptions& options = {});

template <typename T>
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> values;  // row-major
  std::vector<ClassLabel> labels;
  // Categorical values absent from the fitted vocabularies.
  std::size_t unseen_categories = 0;

  std::span<const T> row(std::size_t r) const { return std::span<const T>(values).subspan(r * cols, cols); }
};

template <typename T>
FeatureMatrix<T> transform(const PreprocessorState& state, const Dataset& ds);

// Rows of `m` as a (rows.size(), cols) tensor.
template <typename T>
Tensor<T> gather_rows(const FeatureMatrix<T>& m, std::span<const std::size_t> rows);

// One-hot (rows.size(), kClassCount) targets for the given rows.
template <typename T>
Tensor<T> one_hot_labels(std::span<const ClassLabel> labels, std::span<const std::size_t> rows);

void write_preprocessor(ByteWriter& w, const PreprocessorState& state);
PreprocessorState read_preprocessor(ByteReader& r);

}  // namespace idsnet
