#include "idsnet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "idsnet/bytes.hpp"
#include "idsnet/errors.hpp"
#include "idsnet/random.hpp"

namespace idsnet {

namespace {

template <typename T>
Eigen::MatrixXd centred(const FeatureMatrix<T>& x, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(x.cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = x.row(rows[i]);
    for (std::size_t c = 0; c < x.cols; ++c)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = static_cast<double>(r[c]);
  }
  m.rowwise() -= m.colwise().mean();
  return m;
}

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::vector<std::size_t> sample_rows(std::size_t total, std::size_t n, std::uint64_t seed) {
  auto idx = iota_indices(total);
  if (n >= total) return idx;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(total - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  return idx;
}

template <typename T>
VarianceProfile svd_variance(const FeatureMatrix<T>& x, std::size_t top_k, std::size_t max_rows, std::uint64_t seed) {
  if (x.rows < 2) throw InputError("svd_variance needs at least 2 rows, got " + std::to_string(x.rows));
  if (max_rows < 2) throw InputError("svd_variance sample size must be at least 2");
  const auto rows = sample_rows(x.rows, max_rows, seed);
  const std::size_t bound = std::min(rows.size(), x.cols);
  if (top_k > bound)
    throw InputError("top_k " + std::to_string(top_k) + " exceeds the rank bound " + std::to_string(bound));
  const auto m = centred(x, rows);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  const Eigen::VectorXd s = svd.singularValues();
  double total = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) total += s[i] * s[i];
  if (!(total > 0.0)) throw NumericalError("svd_variance: the centred matrix is zero");

  VarianceProfile p;
  p.rows_used = rows.size();
  const std::size_t k = top_k == 0 ? static_cast<std::size_t>(s.size()) : top_k;
  double running = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double sv = s[static_cast<Eigen::Index>(i)];
    p.singular_values.push_back(sv);
    p.explained.push_back(sv * sv / total);
    running += sv * sv;
    p.cumulative.push_back(running / total);
  }
  return p;
}

template <typename T>
PcaProjection pca_project(const FeatureMatrix<T>& x, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 3) throw InputError("pca_project needs at least 3 samples, got " + std::to_string(n_samples));
  if (n_samples > x.rows)
    throw InputError("pca_project asked for " + std::to_string(n_samples) + " samples from " +
                     std::to_string(x.rows) + " rows");
  if (x.cols < 2) throw InputError("pca_project needs at least 2 columns");
  const auto rows = sample_rows(x.rows, n_samples, seed);
  const auto m = centred(x, rows);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinV);
  Eigen::MatrixXd v = svd.matrixV().leftCols(2);
  for (Eigen::Index c = 0; c < 2; ++c) {
    Eigen::Index arg = 0;
    v.col(c).cwiseAbs().maxCoeff(&arg);
    if (v(arg, c) < 0.0) v.col(c) = -v.col(c);
  }
  const Eigen::MatrixXd coords = m * v;

  PcaProjection p;
  p.rows = rows.size();
  p.cols = x.cols;
  p.coordinates.resize(p.rows * 2);
  for (std::size_t i = 0; i < p.rows; ++i)
    for (std::size_t c = 0; c < 2; ++c)
      p.coordinates[i * 2 + c] = coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
  p.labels.reserve(p.rows);
  for (auto r : rows) p.labels.push_back(x.labels[r]);
  p.components.resize(2 * p.cols);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t f = 0; f < p.cols; ++f)
      p.components[c * p.cols + f] = v(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(c));
  return p;
}

std::string variance_csv(const VarianceProfile& profile) {
  std::string out = "component,singular_value,explained_variance,cumulative_variance\n";
  for (std::size_t i = 0; i < profile.singular_values.size(); ++i)
    out += std::to_string(i + 1) + "," + fmt9(profile.singular_values[i]) + "," + fmt9(profile.explained[i]) + "," +
           fmt9(profile.cumulative[i]) + "\n";
  return out;
}

std::string projection_csv(const PcaProjection& projection) {
  std::string out = "pc1,pc2,label\n";
  for (std::size_t i = 0; i < projection.rows; ++i)
    out += fmt9(projection.coordinates[2 * i]) + "," + fmt9(projection.coordinates[2 * i + 1]) + "," +
           std::string(class_name(projection.labels[i])) + "\n";
  return out;
}

void export_csv(const VarianceProfile& profile, const std::filesystem::path& path) {
  write_file_atomic(path, variance_csv(profile));
}

void export_csv(const PcaProjection& projection, const std::filesystem::path& path) {
  write_file_atomic(path, projection_csv(projection));
}

template VarianceProfile svd_variance(const FeatureMatrix<float>&, std::size_t, std::size_t, std::uint64_t);
template VarianceProfile svd_variance(const FeatureMatrix<double>&, std::size_t, std::size_t, std::uint64_t);
template PcaProjection pca_project(const FeatureMatrix<float>&, std::size_t, std::uint64_t);
template PcaProjection pca_project(const FeatureMatrix<double>&, std::size_t, std::uint64_t);

}  // namespace idsnet
