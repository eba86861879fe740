#pragma once

// Hand-rolled generators and independent reference computations shared by the
// test binaries.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "svart/data.hpp"
#include "svart/random.hpp"
#include "svart/var_core.hpp"

namespace testing {

using svart::Matrix;
using svart::Rng;
using svart::StructuralParams;
using svart::Vector;

inline Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * svart::standard_normal(rng);
  return m;
}

// Well-conditioned impact matrix: identity plus small perturbation.
inline Matrix random_impact(Rng& rng, Eigen::Index N, double off = 0.4) {
  Matrix B = Matrix::Identity(N, N) + random_matrix(rng, N, N, off);
  for (Eigen::Index i = 0; i < N; ++i) B(i, i) = 0.8 + 0.6 * svart::uniform01(rng);
  return B;
}

// Companion matrix built independently of the library.
inline Matrix reference_companion(const StructuralParams& p) {
  const auto N = p.variables();
  const int L = p.lags();
  Matrix C = Matrix::Zero(N * L, N * L);
  for (int l = 0; l < L; ++l) C.block(0, l * N, N, N) = p.A[static_cast<std::size_t>(l)];
  if (L > 1) C.bottomLeftCorner(N * (L - 1), N * (L - 1)).setIdentity();
  return C;
}

// Random stable VAR: lag matrices rescaled so the companion spectral radius
// equals `radius`.
inline StructuralParams random_stable_model(Rng& rng, Eigen::Index N, int lags,
                                            double radius = 0.8) {
  StructuralParams p;
  p.a0 = random_matrix(rng, N, 1, 0.5);
  for (int l = 0; l < lags; ++l) p.A.push_back(random_matrix(rng, N, N, 0.5 / (l + 1)));
  const Eigen::EigenSolver<Matrix> es(reference_companion(p));
  const double rho = es.eigenvalues().cwiseAbs().maxCoeff();
  // A_l scales by s^l so that every companion eigenvalue scales by s.
  const double s = radius / rho;
  for (int l = 0; l < lags; ++l) p.A[static_cast<std::size_t>(l)] *= std::pow(s, l + 1);
  p.Binv = random_impact(rng, N).inverse();
  p.lambda = Vector(N);
  for (Eigen::Index i = 0; i < N; ++i) p.lambda(i) = 3.0 + 10.0 * svart::uniform01(rng);
  return p;
}

inline svart::TimeSeriesPanel make_panel(const Matrix& values, svart::Quarter start = {1990, 1}) {
  svart::TimeSeriesPanel panel;
  panel.values = values;
  svart::Quarter q = start;
  for (Eigen::Index t = 0; t < values.rows(); ++t) {
    panel.dates.push_back(q);
    q = q.next();
  }
  for (Eigen::Index i = 0; i < values.cols(); ++i) panel.names.push_back("v" + std::to_string(i + 1));
  return panel;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("svart_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Sample mean with a batch-means standard error for autocorrelated draws.
struct BatchMean {
  double mean = 0.0;
  double se = 0.0;
};

inline BatchMean batch_mean(const std::vector<double>& x, int batches = 50) {
  const std::size_t per = x.size() / static_cast<std::size_t>(batches);
  std::vector<double> means;
  double total = 0.0;
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < per; ++i) s += x[static_cast<std::size_t>(b) * per + i];
    means.push_back(s / static_cast<double>(per));
    total += means.back();
  }
  BatchMean out;
  out.mean = total / batches;
  double v = 0.0;
  for (double m : means) v += (m - out.mean) * (m - out.mean);
  out.se = std::sqrt(v / (batches - 1) / batches);
  return out;
}

}  // namespace testing
