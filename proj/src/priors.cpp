#include "svart/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "svart/errors.hpp"

namespace svart {

void MinnesotaConfig::validate(Eigen::Index n_vars) const {
  if (!(kappa1 > 0 && kappa2 > 0 && kappa3 > 0 && kappa4 > 0))
    throw ConfigError("Minnesota hyperparameters must be positive");
  if (sigma.size() != 0 && sigma.size() != n_vars)
    throw SizingError("priors", "sigma has the wrong length");
  if (sigma.size() != 0 && !(sigma.array() > 0.0).all())
    throw ConfigError("Minnesota scales sigma must be positive");
  if (first_lag_mean.size() != 0 && first_lag_mean.size() != n_vars)
    throw SizingError("priors", "first_lag_mean has the wrong length");
}

int PriorSet::lags() const {
  const auto N = variables();
  if (N == 0) return 0;
  return static_cast<int>((a_mean.size() / N - 1) / N);
}

void PriorSet::validate() const {
  const auto N = variables();
  if (N == 0) throw SizingError("priors", "empty prior set");
  const auto p = lags();
  if (p < 1 || a_mean.size() != N * (N * p + 1))
    throw SizingError("priors", "a_mean length is not N^2 p + N");
  if (a_var.size() != a_mean.size()) throw SizingError("priors", "a_var length mismatch");
  if (!(a_var.array() > 0.0).all()) throw NumericError("priors", "a_var must be positive");
  if (b_mean.size() != N * N) throw SizingError("priors", "b_mean length is not N^2");
  if (!(b_sd > 0.0)) throw NumericError("priors", "b_sd must be positive");
  if (!(lambda_mean.array() > 2.0).all())
    throw NumericError("priors", "lambda prior means must exceed 2");
}

double PriorSet::log_density_a(const Vector& a) const {
  constexpr double log_2pi = 1.8378770664093454836;
  return -0.5 * ((a - a_mean).array().square() / a_var.array()).sum() -
         0.5 * a_var.array().log().sum() - 0.5 * static_cast<double>(a.size()) * log_2pi;
}

double PriorSet::log_density_b(const Matrix& binv) const {
  constexpr double log_2pi = 1.8378770664093454836;
  const Eigen::Map<const Vector> b(binv.data(), binv.size());
  const auto n = static_cast<double>(b.size());
  return -0.5 * (b - b_mean).squaredNorm() / (b_sd * b_sd) - n * std::log(b_sd) -
         0.5 * n * log_2pi;
}

double PriorSet::log_density_lambda(double lambda, Eigen::Index shock) const {
  if (!(lambda > 2.0)) return -std::numeric_limits<double>::infinity();
  const double mean = lambda_mean(shock);
  switch (lambda_support) {
    case LambdaSupport::Shift: return exponential_log_density(lambda - 2.0, mean - 2.0);
    case LambdaSupport::Truncate: return exponential_log_density(lambda - 2.0, mean);
  }
  return 0.0;
}

double exponential_log_density(double x, double mean) {
  if (x < 0.0) return -std::numeric_limits<double>::infinity();
  return -std::log(mean) - x / mean;
}

Vector minnesota_variances(const MinnesotaConfig& cfg, Eigen::Index n_vars, int lags) {
  cfg.validate(n_vars);
  const Vector sigma = cfg.sigma.size() ? cfg.sigma : Vector::Ones(n_vars);
  const Eigen::Index K = n_vars * lags + 1;
  Vector var(n_vars * K);
  for (Eigen::Index eq = 0; eq < n_vars; ++eq) {
    var(eq * K) = std::pow(sigma(eq) * cfg.kappa4, 2);
    for (int l = 1; l <= lags; ++l) {
      const double decay = std::pow(static_cast<double>(l), cfg.kappa3);
      for (Eigen::Index q = 0; q < n_vars; ++q) {
        const double sd = eq == q ? cfg.kappa1 / decay
                                  : cfg.kappa1 * cfg.kappa2 * sigma(eq) / (decay * sigma(q));
        var(eq * K + lag_column(n_vars, l, q)) = sd * sd;
      }
    }
  }
  return var;
}

Vector minnesota_mean(const MinnesotaConfig& cfg, Eigen::Index n_vars, int lags) {
  cfg.validate(n_vars);
  const Eigen::Index K = n_vars * lags + 1;
  Vector mean = Vector::Zero(n_vars * K);
  if (cfg.first_lag_mean.size())
    for (Eigen::Index eq = 0; eq < n_vars; ++eq)
      mean(eq * K + lag_column(n_vars, 1, eq)) = cfg.first_lag_mean(eq);
  return mean;
}

Vector estimate_sigma(const TimeSeriesPanel& panel, int lags) {
  Vector sigma(panel.variables());
  for (Eigen::Index q = 0; q < panel.variables(); ++q) {
    TimeSeriesPanel single;
    single.values = panel.values.col(q);
    single.names = {panel.names.empty() ? std::string("y") : panel.names[q]};
    const Eigen::Index T = single.values.rows();
    if (T <= 2 * lags + 2)
      throw SizingError("priors", "too few observations for a univariate AR(" +
                                      std::to_string(lags) + ")");
    const auto layout = build_layout(single, lags);
    const auto fit = ols(layout);
    const auto dof = static_cast<double>(layout.observations() - layout.regressors());
    const double s = std::sqrt(fit.residuals.squaredNorm() / dof);
    if (!(s > 1e-12 * std::max(1.0, single.values.cwiseAbs().maxCoeff())))
      throw DegenerateDataError("priors", "variable " + single.names[0] +
                                              " has zero residual variance");
    sigma(q) = s;
  }
  return sigma;
}

PriorSet default_priors(const MinnesotaConfig& cfg, Eigen::Index n_vars, int lags) {
  PriorSet prior;
  prior.a_mean = minnesota_mean(cfg, n_vars, lags);
  prior.a_var = minnesota_variances(cfg, n_vars, lags);
  prior.b_mean = Vector::Zero(n_vars * n_vars);
  prior.b_sd = 1000.0;
  prior.lambda_mean = Vector::Constant(n_vars, 10.0);
  prior.lambda_support = LambdaSupport::Shift;
  return prior;
}

StructuralParams draw_from_prior(const PriorSet& priors, Rng& rng) {
  const auto N = priors.variables();
  const int p = priors.lags();
  const Vector a =
      priors.a_mean + priors.a_var.cwiseSqrt().cwiseProduct(standard_normal_vector(rng, priors.a_mean.size()));
  const Vector b = priors.b_mean + priors.b_sd * standard_normal_vector(rng, N * N);
  const Matrix binv = Eigen::Map<const Matrix>(b.data(), N, N);
  Vector lambda(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const double mean = priors.lambda_support == LambdaSupport::Shift ? priors.lambda_mean(i) - 2.0
                                                                      : priors.lambda_mean(i);
    lambda(i) = 2.0 + exponential_mean(rng, mean);
  }
  return StructuralParams::from_coefficient_vector(a, N, p, binv, lambda);
}

}  // namespace svart
