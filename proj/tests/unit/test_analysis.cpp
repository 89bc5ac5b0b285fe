#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "idsnet/analysis.hpp"
#include "idsnet/errors.hpp"
#include "idsnet/random.hpp"

using namespace idsnet;

namespace {

FeatureMatrix<double> matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  FeatureMatrix<double> m;
  m.rows = rows;
  m.cols = cols;
  m.values = std::move(values);
  m.labels.assign(rows, ClassLabel::normal);
  for (std::size_t i = 0; i < rows; ++i) m.labels[i] = kAllClasses[i % 3];
  return m;
}

FeatureMatrix<double> random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(rows * cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) v[i * cols + j] = rng.normal() * (1.0 + static_cast<double>(j));
  return matrix(rows, cols, std::move(v));
}

// Cyclic Jacobi eigenvalues of the centred covariance X^T X.
std::vector<double> jacobi_eigenvalues(const FeatureMatrix<double>& x) {
  const std::size_t n = x.cols;
  std::vector<double> mean(n, 0.0);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < n; ++j) mean[j] += x.values[i * n + j] / static_cast<double>(x.rows);
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q < n; ++q)
        a[p * n + q] += (x.values[i * n + p] - mean[p]) * (x.values[i * n + q] - mean[q]);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p * n + q]) < 1e-300) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * a[p * n + q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = std::max(0.0, a[i * n + i]);
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

}  // namespace

TEST(SvdVariance, MatchesJacobiOracle) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto x = random_matrix(20, 10, seed);
    const auto p = svd_variance(x, 0);
    const auto ev = jacobi_eigenvalues(x);
    ASSERT_EQ(p.singular_values.size(), 10u);
    double total = 0.0;
    for (double e : ev) total += e;
    for (std::size_t i = 0; i < 10; ++i) {
      EXPECT_NEAR(p.singular_values[i] * p.singular_values[i], ev[i], 1e-8 * total);
      EXPECT_NEAR(p.explained[i], ev[i] / total, 1e-8);
    }
  }
}

TEST(SvdVariance, RankOneConcentratesVariance) {
  std::vector<double> v;
  for (int i = 0; i < 12; ++i)
    for (double d : {1.0, -2.0, 0.5, 3.0}) v.push_back(d * (i - 4.0));
  const auto p = svd_variance(matrix(12, 4, v), 0);
  EXPECT_NEAR(p.explained[0], 1.0, 1e-12);
  EXPECT_NEAR(p.cumulative.back(), 1.0, 1e-12);
}

TEST(SvdVariance, FractionsSumToOneAndAreMonotone) {
  const auto x = random_matrix(40, 8, 4);
  const auto p = svd_variance(x, 3);
  EXPECT_EQ(p.singular_values.size(), 3u);
  const auto all = svd_variance(x, 0);
  double s = 0.0;
  for (double e : all.explained) s += e;
  EXPECT_NEAR(s, 1.0, 1e-12);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(p.explained[i], all.explained[i]);
  for (std::size_t i = 1; i < all.singular_values.size(); ++i) {
    EXPECT_LE(all.singular_values[i], all.singular_values[i - 1]);
    EXPECT_GE(all.cumulative[i], all.cumulative[i - 1]);
  }
}

TEST(SvdVariance, IsotropicDataHasEqualFractions) {
  // Four orthogonal +-e_j directions: centred covariance is 2 I.
  std::vector<double> v;
  for (std::size_t j = 0; j < 4; ++j)
    for (double s : {1.0, -1.0}) {
      for (std::size_t k = 0; k < 4; ++k) v.push_back(k == j ? s : 0.0);
    }
  const auto p = svd_variance(matrix(8, 4, v), 0);
  for (double e : p.explained) EXPECT_NEAR(e, 0.25, 1e-12);
}

TEST(SvdVariance, Errors) {
  EXPECT_THROW(svd_variance(random_matrix(1, 3, 1), 0), InputError);
  EXPECT_THROW(svd_variance(random_matrix(5, 3, 1), 4), InputError);
  EXPECT_THROW(svd_variance(matrix(3, 2, std::vector<double>(6, 1.5)), 0), NumericalError);
}

TEST(SvdVariance, SamplingCapIsSeeded) {
  const auto x = random_matrix(200, 5, 8);
  const auto a = svd_variance(x, 0, 50, 1), b = svd_variance(x, 0, 50, 1), c = svd_variance(x, 0, 50, 2);
  EXPECT_EQ(a.rows_used, 50u);
  EXPECT_EQ(a.singular_values, b.singular_values);
  EXPECT_NE(a.singular_values, c.singular_values);
}

TEST(SampleRows, DistinctSortedAndCapped) {
  const auto s = sample_rows(100, 30, 3);
  ASSERT_EQ(s.size(), 30u);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  EXPECT_EQ(std::adjacent_find(s.begin(), s.end()), s.end());
  EXPECT_EQ(sample_rows(10, 50, 3).size(), 10u);
}

TEST(Pca, PlanarDataKeepsDistances) {
  // Points on a tilted plane in 3D: the projection is an isometry.
  Rng rng(9);
  const std::size_t n = 25;
  std::vector<double> v;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rng.normal() * 3.0, b = rng.normal();
    v.push_back(a * 0.6);
    v.push_back(a * 0.8);
    v.push_back(b);
  }
  const auto x = matrix(n, 3, v);
  const auto p = pca_project(x, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double d3 = 0.0;
      for (std::size_t k = 0; k < 3; ++k) d3 += std::pow(v[i * 3 + k] - v[j * 3 + k], 2);
      const double d2 = std::pow(p.coordinates[i * 2] - p.coordinates[j * 2], 2) +
                        std::pow(p.coordinates[i * 2 + 1] - p.coordinates[j * 2 + 1], 2);
      EXPECT_NEAR(d2, d3, 1e-9 * (1.0 + d3));
    }
}

TEST(Pca, ComponentsAreOrthonormalAndOrdered) {
  const auto x = random_matrix(60, 6, 10);
  const auto p = pca_project(x, 60);
  ASSERT_EQ(p.components.size(), 12u);
  double n0 = 0, n1 = 0, dot = 0, v0 = 0, v1 = 0;
  for (std::size_t k = 0; k < 6; ++k) {
    n0 += p.components[k] * p.components[k];
    n1 += p.components[6 + k] * p.components[6 + k];
    dot += p.components[k] * p.components[6 + k];
  }
  EXPECT_NEAR(n0, 1.0, 1e-12);
  EXPECT_NEAR(n1, 1.0, 1e-12);
  EXPECT_NEAR(dot, 0.0, 1e-12);
  for (std::size_t i = 0; i < p.rows; ++i) {
    v0 += p.coordinates[i * 2] * p.coordinates[i * 2];
    v1 += p.coordinates[i * 2 + 1] * p.coordinates[i * 2 + 1];
  }
  EXPECT_GE(v0, v1);
  for (std::size_t c = 0; c < 2; ++c) {
    const auto first = p.components.begin() + static_cast<std::ptrdiff_t>(c * 6);
    const auto big = std::max_element(first, first + 6, [](double a, double b) { return std::abs(a) < std::abs(b); });
    EXPECT_GT(*big, 0.0);
  }
}

TEST(Pca, DuplicateRowsProjectIdentically) {
  auto x = random_matrix(20, 4, 11);
  std::copy_n(x.values.begin(), 4, x.values.begin() + 4);
  const auto p = pca_project(x, 20);
  EXPECT_EQ(p.coordinates[0], p.coordinates[2]);
  EXPECT_EQ(p.coordinates[1], p.coordinates[3]);
}

TEST(Pca, DeterministicAndLabelled) {
  const auto x = random_matrix(300, 5, 12);
  const auto a = pca_project(x, 100, 4), b = pca_project(x, 100, 4);
  EXPECT_EQ(a.coordinates, b.coordinates);
  EXPECT_EQ(a.rows, 100u);
  EXPECT_EQ(a.labels.size(), 100u);
}

TEST(Pca, Errors) {
  const auto x = random_matrix(10, 4, 13);
  EXPECT_THROW(pca_project(x, 2), InputError);
  EXPECT_THROW(pca_project(x, 11), InputError);
  EXPECT_THROW(pca_project(random_matrix(10, 1, 1), 5), InputError);
}

TEST(AnalysisCsv, VarianceTable) {
  const auto p = svd_variance(random_matrix(30, 6, 14), 4);
  const auto csv = variance_csv(p);
  EXPECT_EQ(csv.rfind("component,singular_value,explained_variance,cumulative_variance\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);

  const auto path = std::filesystem::temp_directory_path() / "idsnet_variance.csv";
  export_csv(p, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::size_t k = 0;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string f;
    std::getline(ss, f, ',');
    EXPECT_EQ(std::stoul(f), k + 1);
    std::getline(ss, f, ',');
    EXPECT_NEAR(std::stod(f), p.singular_values[k], 1e-8 * p.singular_values[k]);
    ++k;
  }
  EXPECT_EQ(k, 4u);
  std::filesystem::remove(path);
}

TEST(AnalysisCsv, ProjectionTable) {
  const auto p = pca_project(random_matrix(9, 3, 15), 9);
  const auto csv = projection_csv(p);
  EXPECT_EQ(csv.rfind("pc1,pc2,label\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 10);
}
