#pragma once

#include <vector>

#include "svart/data.hpp"

namespace svart {

// Parameters of the structural VAR
//   y_t = a0 + sum_l A_l y_{t-l} + B eps_t,   eps_{i,t} ~ t(lambda_i), unit scale.
// The sampler works on Binv = B^{-1}; B is recovered by inversion.
struct StructuralParams {
  Vector a0;
  std::vector<Matrix> A;  // A_1..A_p
  Matrix Binv;
  Vector lambda;

  Eigen::Index variables() const { return a0.size(); }
  int lags() const { return static_cast<int>(A.size()); }

  // Throws NumericError / SizingError when the type invariants fail.
  void validate() const;

  // B = Binv^{-1}; rejects Binv with condition number above 1e12.
  Matrix impact() const;

  // Stacked coefficients Pi = [a0, A_1, ..., A_p] (N x (Np+1)), columns in
  // RegressionLayout order.
  Matrix coefficients() const;

  // vec(Pi^T): equation-major, i.e. entry i*(Np+1)+c is Pi(i, c).
  Vector coefficient_vector() const;

  static StructuralParams from_coefficients(const Matrix& pi, const Matrix& binv,
                                            const Vector& lambda);
  static StructuralParams from_coefficient_vector(const Vector& a, Eigen::Index n_vars, int lags,
                                                  const Matrix& binv, const Vector& lambda);
};

// A posterior draw carries exactly the structural parameters; the auxiliary
// mixing weights live in the sampler state and are not persisted.
using StructuralDraw = StructuralParams;

struct MaCoefficients {
  std::vector<Matrix> psi;    // reduced-form, psi[0] = I
  std::vector<Matrix> theta;  // structural, theta[j] = psi[j] * B
};

inline constexpr double kDefaultStabilityTol = 1e-7;
inline constexpr double kMaxConditionNumber = 1e12;

Matrix companion(const StructuralParams& params);

// Largest eigenvalue modulus of the companion matrix (full eigendecomposition).
double spectral_radius(const StructuralParams& params);

// Same quantity by power iteration on the companion matrix. Converges slowly
// when the dominant eigenvalues are close in modulus.
double spectral_radius_power(const StructuralParams& params, int max_iterations = 20000,
                             double tol = 1e-13);

bool is_stable(const StructuralParams& params, double tol = kDefaultStabilityTol);

MaCoefficients ma_coefficients(const StructuralParams& params, int horizon);

// Reduced-form Psi_j only; needs no inversion of Binv.
std::vector<Matrix> reduced_form_ma(const StructuralParams& params, int horizon);

// mu = (I - sum A_l)^{-1} a0.
Vector unconditional_mean(const StructuralParams& params);

// Condition number in the 2-norm via singular values.
double condition_number(const Matrix& m);

}  // namespace svart
