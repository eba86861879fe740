#pragma once

#include "svart/data.hpp"
#include "svart/random.hpp"
#include "svart/var_core.hpp"

namespace svart {

struct MinnesotaConfig {
  double kappa1 = 3.0;    // overall tightness
  double kappa2 = 0.5;    // cross-variable tightness
  double kappa3 = 1.0;    // lag decay
  double kappa4 = 100.0;  // intercept scale
  Vector sigma;           // per-variable scales sigma_q
  Vector first_lag_mean;  // own first-lag prior mean; empty means zero

  void validate(Eigen::Index n_vars) const;
};

// How the exponential prior on lambda is moved onto the support lambda > 2.
enum class LambdaSupport {
  Shift,     // lambda = 2 + eta, eta ~ Exp(mean - 2); prior mean stays at `mean`
  Truncate,  // Exp(mean) conditioned on lambda > 2
};

struct PriorSet {
  Vector a_mean;  // N^2 p + N, equation-major (see StructuralParams::coefficient_vector)
  Vector a_var;   // diagonal of V_a
  Vector b_mean;  // vec(Binv), column-major
  double b_sd = 1000.0;
  Vector lambda_mean;
  LambdaSupport lambda_support = LambdaSupport::Shift;

  Eigen::Index variables() const { return lambda_mean.size(); }
  int lags() const;
  void validate() const;

  double log_density_a(const Vector& a) const;
  double log_density_b(const Matrix& binv) const;
  double log_density_lambda(double lambda, Eigen::Index shock) const;
};

// Prior variances of the stacked coefficient vector:
//   own lag l:      (kappa1 / l^kappa3)^2
//   cross lag l:    (kappa1 kappa2 sigma_p / (l^kappa3 sigma_q))^2
//   intercept:      (sigma_p kappa4)^2
// for equation p and regressor variable q.
Vector minnesota_variances(const MinnesotaConfig& cfg, Eigen::Index n_vars, int lags);

Vector minnesota_mean(const MinnesotaConfig& cfg, Eigen::Index n_vars, int lags);

// Residual standard deviations of univariate AR(p) fits with intercept.
Vector estimate_sigma(const TimeSeriesPanel& panel, int lags);

// b ~ N(0, 1000^2 I), lambda prior mean 10, Minnesota prior on a.
PriorSet default_priors(const MinnesotaConfig& cfg, Eigen::Index n_vars, int lags);

// Joint prior draw of (a, Binv, lambda).
StructuralParams draw_from_prior(const PriorSet& priors, Rng& rng);

// Density (1/mean) exp(-x/mean) for x >= 0.
double exponential_log_density(double x, double mean);

}  // namespace svart
