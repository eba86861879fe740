#include "svart/var_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "svart/errors.hpp"

namespace svart {

void StructuralParams::validate() const {
  const auto N = variables();
  if (A.empty()) throw SizingError("var-core", "need at least one lag matrix");
  for (const auto& a : A)
    if (a.rows() != N || a.cols() != N) throw SizingError("var-core", "lag matrix is not N x N");
  if (Binv.rows() != N || Binv.cols() != N) throw SizingError("var-core", "Binv is not N x N");
  if (lambda.size() != N) throw SizingError("var-core", "lambda length differs from N");
  if (!(lambda.array() > 2.0).all())
    throw NumericError("var-core", "degrees of freedom must exceed 2");
  if (std::abs(Binv.determinant()) <= 1e-12)
    throw NumericError("var-core", "Binv is singular (|det| <= 1e-12)");
}

Matrix StructuralParams::impact() const {
  const double cond = condition_number(Binv);
  if (!(cond <= kMaxConditionNumber))
    throw NumericError("var-core", "Binv condition number " + std::to_string(cond) +
                                       " exceeds 1e12");
  return Binv.partialPivLu().inverse();
}

Matrix StructuralParams::coefficients() const {
  const auto N = variables();
  Matrix pi(N, N * lags() + 1);
  pi.col(0) = a0;
  for (int l = 1; l <= lags(); ++l) pi.middleCols(lag_column(N, l, 0), N) = A[l - 1];
  return pi;
}

Vector StructuralParams::coefficient_vector() const {
  const Matrix pi_t = coefficients().transpose();
  return Eigen::Map<const Vector>(pi_t.data(), pi_t.size());
}

StructuralParams StructuralParams::from_coefficients(const Matrix& pi, const Matrix& binv,
                                                     const Vector& lambda) {
  const auto N = pi.rows();
  if (N == 0 || (pi.cols() - 1) % N != 0)
    throw SizingError("var-core", "coefficient matrix is not N x (Np+1)");
  const int p = static_cast<int>((pi.cols() - 1) / N);
  StructuralParams out;
  out.a0 = pi.col(0);
  for (int l = 1; l <= p; ++l) out.A.push_back(pi.middleCols(lag_column(N, l, 0), N));
  out.Binv = binv;
  out.lambda = lambda;
  return out;
}

StructuralParams StructuralParams::from_coefficient_vector(const Vector& a, Eigen::Index n_vars,
                                                           int lags, const Matrix& binv,
                                                           const Vector& lambda) {
  const Eigen::Index K = n_vars * lags + 1;
  if (a.size() != n_vars * K) throw SizingError("var-core", "coefficient vector length mismatch");
  const Matrix pi = Eigen::Map<const Matrix>(a.data(), K, n_vars).transpose();
  return from_coefficients(pi, binv, lambda);
}

Matrix companion(const StructuralParams& params) {
  const auto N = params.variables();
  const auto p = params.lags();
  Matrix C = Matrix::Zero(N * p, N * p);
  for (int l = 0; l < p; ++l) C.block(0, l * N, N, N) = params.A[l];
  if (p > 1) C.bottomLeftCorner(N * (p - 1), N * (p - 1)).setIdentity();
  return C;
}

double spectral_radius(const StructuralParams& params) {
  const Matrix C = companion(params);
  Eigen::EigenSolver<Matrix> es(C, false);
  if (es.info() != Eigen::Success) throw NumericError("var-core", "eigendecomposition failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_radius_power(const StructuralParams& params, int max_iterations, double tol) {
  // Repeated squaring of the companion matrix: log rho = lim log||C^k|| / k with
  // k = 2^m. Normalising after each squaring keeps the iterate representable.
  Matrix M = companion(params);
  double log_norm = 0.0;  // log ||C^(2^m)||
  double scale = 1.0;     // 2^m
  double previous = std::numeric_limits<double>::infinity();
  for (int m = 0; m < std::min(max_iterations, 1000); ++m) {
    const double n = M.norm();
    if (n == 0.0) return 0.0;
    M /= n;
    log_norm += std::log(n);
    const double estimate = std::exp(log_norm / scale);
    if (std::abs(estimate - previous) <= tol * std::max(1.0, estimate) && m > 8) return estimate;
    previous = estimate;
    M = M * M;
    log_norm *= 2.0;
    scale *= 2.0;
    if (!std::isfinite(scale)) break;
  }
  return previous;
}

bool is_stable(const StructuralParams& params, double tol) {
  return spectral_radius(params) < 1.0 - tol;
}

std::vector<Matrix> reduced_form_ma(const StructuralParams& params, int horizon) {
  if (horizon < 0) throw SizingError("var-core", "horizon must be non-negative");
  const auto N = params.variables();
  const auto p = params.lags();
  std::vector<Matrix> psi;
  psi.reserve(static_cast<std::size_t>(horizon) + 1);
  psi.push_back(Matrix::Identity(N, N));
  for (int j = 1; j <= horizon; ++j) {
    Matrix next = Matrix::Zero(N, N);
    for (int l = 1; l <= std::min(j, p); ++l) next.noalias() += psi[j - l] * params.A[l - 1];
    psi.push_back(std::move(next));
  }
  return psi;
}

MaCoefficients ma_coefficients(const StructuralParams& params, int horizon) {
  MaCoefficients out;
  out.psi = reduced_form_ma(params, horizon);
  const Matrix B = params.impact();
  out.theta.reserve(out.psi.size());
  for (const auto& psi : out.psi) out.theta.push_back(psi * B);
  return out;
}

Vector unconditional_mean(const StructuralParams& params) {
  const auto N = params.variables();
  Matrix a1 = Matrix::Identity(N, N);
  for (const auto& a : params.A) a1 -= a;
  if (condition_number(a1) > kMaxConditionNumber)
    throw NumericError("var-core", "I - sum A_l is near singular");
  return a1.partialPivLu().solve(params.a0);
}

double condition_number(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double smallest = s(s.size() - 1);
  if (smallest == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smallest;
}

}  // namespace svart
