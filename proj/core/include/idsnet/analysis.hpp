#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "idsnet/kdd_ingest.hpp"
#include "idsnet/preprocess.hpp"

namespace idsnet {

struct VarianceProfile {
  std::size_t rows_used = 0;
  std::vector<double> singular_values;  // descending
  std::vector<double> explained;        // sigma_i^2 / sum of all sigma_j^2
  std::vector<double> cumulative;
};

struct PcaProjection {
  std::size_t rows = 0;
  std::vector<double> coordinates;  // row-major (rows, 2)
  std::vector<ClassLabel> labels;
  // Two unit component vectors, each of length cols, row-major.
  std::vector<double> components;
  std::size_t cols = 0;
};

// Seeded uniform sample of min(n, total) distinct row indices, ascending.
std::vector<std::size_t> sample_rows(std::size_t total, std::size_t n, std::uint64_t seed);

// Singular values of the mean-centred matrix (or of a seeded sample of at most
// max_rows rows). top_k = 0 keeps every component; explained fractions are
// always relative to the full spectrum.
template <typename T>
VarianceProfile svd_variance(const FeatureMatrix<T>& x, std::size_t top_k, std::size_t max_rows = 100000,
                             std::uint64_t seed = 42);

// Projects a seeded sample of n_samples rows onto the top two right singular
// vectors of the centred sample. Each component is signed so that its largest
// magnitude entry is positive.
template <typename T>
PcaProjection pca_project(const FeatureMatrix<T>& x, std::size_t n_samples = 90000, std::uint64_t seed = 42);

// Header: component,singular_value,explained_variance,cumulative_variance
std::string variance_csv(const VarianceProfile& profile);
// Header: pc1,pc2,label
std::string projection_csv(const PcaProjection& projection);

void export_csv(const VarianceProfile& profile, const std::filesystem::path& path);
void export_csv(const PcaProjection& projection, const std::filesystem::path& path);

}  // namespace idsnet
