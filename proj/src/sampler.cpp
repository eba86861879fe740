#include "svart/sampler.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "svart/errors.hpp"

namespace svart {

namespace {

double log_abs_det(const Matrix& m) {
  const Eigen::PartialPivLU<Matrix> lu(m);
  const double det = lu.determinant();
  return std::log(std::abs(det));
}

// Data part of the lambda_i conditional given sufficient statistics of w_i.
double lambda_data_term(double lambda, double n, double sum_log_w, double sum_w) {
  const double h = 0.5 * lambda;
  return n * (h * std::log(h) - std::lgamma(h)) + (h - 1.0) * sum_log_w - h * sum_w;
}

}  // namespace

void SamplerConfig::validate() const {
  if (burn_in < 0) throw ConfigError("burn_in must be non-negative");
  if (iterations <= burn_in) throw ConfigError("iterations must exceed burn_in");
  if (thin < 1) throw ConfigError("thin must be at least 1");
  if (adapt_window < 1) throw ConfigError("adapt_window must be at least 1");
  if (!(target_low > 0.0 && target_low < target_high && target_high < 1.0))
    throw ConfigError("acceptance targets must satisfy 0 < low < high < 1");
  if (!(initial_binv_scale > 0.0 && initial_lambda_scale > 0.0))
    throw ConfigError("initial proposal scales must be positive");
}

SamplerConfig SamplerConfig::paper_scale() {
  SamplerConfig c;
  c.iterations = 1'100'000;
  c.burn_in = 100'000;
  c.thin = 1;
  return c;
}

Chain Chain::stable_only() const {
  Chain out;
  out.meta = meta;
  out.names = names;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    if (i < stable.size() && !stable[i]) continue;
    out.draws.push_back(draws[i]);
    out.stable.push_back(true);
  }
  return out;
}

double log_student_t(double x, double lambda) {
  const double log_pi = std::log(std::numbers::pi);
  return std::lgamma(0.5 * (lambda + 1.0)) - std::lgamma(0.5 * lambda) -
         0.5 * (std::log(lambda) + log_pi) - 0.5 * (lambda + 1.0) * std::log1p(x * x / lambda);
}

Matrix structural_residuals(const StructuralDraw& draw, const RegressionLayout& layout) {
  const Matrix U = layout.Y - layout.X * draw.coefficients().transpose();
  return U * draw.Binv.transpose();
}

double log_posterior_kernel(const StructuralDraw& draw, const RegressionLayout& layout,
                            const PriorSet& priors) {
  const auto T = static_cast<double>(layout.observations());
  const double det_term = T * log_abs_det(draw.Binv);
  if (!std::isfinite(det_term))
    throw NumericError("sampler", "kernel term log|det Binv| is not finite");

  const Matrix E = structural_residuals(draw, layout);
  double lik = 0.0;
  for (Eigen::Index i = 0; i < E.cols(); ++i)
    for (Eigen::Index t = 0; t < E.rows(); ++t) lik += log_student_t(E(t, i), draw.lambda(i));
  if (!std::isfinite(lik)) throw NumericError("sampler", "kernel t log-likelihood is not finite");

  const double prior_a = priors.log_density_a(draw.coefficient_vector());
  if (!std::isfinite(prior_a)) throw NumericError("sampler", "kernel prior on a is not finite");
  const double prior_b = priors.log_density_b(draw.Binv);
  if (!std::isfinite(prior_b)) throw NumericError("sampler", "kernel prior on Binv is not finite");
  double prior_lambda = 0.0;
  for (Eigen::Index i = 0; i < draw.lambda.size(); ++i)
    prior_lambda += priors.log_density_lambda(draw.lambda(i), i);
  if (!std::isfinite(prior_lambda))
    throw NumericError("sampler", "kernel prior on lambda is not finite");

  return det_term + lik + prior_a + prior_b + prior_lambda;
}

MixingWeights draw_mixing(const StructuralDraw& draw, const RegressionLayout& layout, Rng& rng) {
  const Matrix E = structural_residuals(draw, layout);
  MixingWeights m;
  m.w.resize(E.rows(), E.cols());
  for (Eigen::Index i = 0; i < E.cols(); ++i) {
    const double lambda = draw.lambda(i);
    for (Eigen::Index t = 0; t < E.rows(); ++t)
      m.w(t, i) = gamma_rate(rng, 0.5 * (lambda + 1.0), 0.5 * (lambda + E(t, i) * E(t, i)));
  }
  return m;
}

GaussianConditional a_conditional(const Matrix& binv, const MixingWeights& mixing,
                                  const RegressionLayout& layout, const PriorSet& priors) {
  const auto N = layout.variables();
  const auto K = layout.regressors();
  const Matrix& X = layout.X;

  GaussianConditional out;
  out.precision = priors.a_var.cwiseInverse().asDiagonal();
  Vector rhs = priors.a_mean.cwiseQuotient(priors.a_var);

  // The rotated regressor of equation i is (b_i kron x_t); its weighted cross
  // product factorises as (b_i b_i') kron S_i with S_i = X' W_i X.
  for (Eigen::Index i = 0; i < N; ++i) {
    const Vector b = binv.row(i).transpose();
    const Vector w = mixing.w.col(i);
    const Matrix S = X.transpose() * w.asDiagonal() * X;
    const Vector v = X.transpose() * w.cwiseProduct(layout.Y * b);
    for (Eigen::Index j = 0; j < N; ++j) {
      rhs.segment(j * K, K) += b(j) * v;
      for (Eigen::Index k = 0; k < N; ++k)
        out.precision.block(j * K, k * K, K, K) += (b(j) * b(k)) * S;
    }
  }
  Eigen::LLT<Matrix> llt(out.precision);
  if (llt.info() != Eigen::Success)
    throw NumericError("sampler", "posterior precision of a is not positive definite");
  out.mean = llt.solve(rhs);
  return out;
}

Vector draw_a(const Matrix& binv, const MixingWeights& mixing, const RegressionLayout& layout,
              const PriorSet& priors, Rng& rng) {
  const auto cond = a_conditional(binv, mixing, layout, priors);
  Eigen::LLT<Matrix> llt(cond.precision);
  if (llt.info() != Eigen::Success)
    throw NumericError("sampler", "posterior precision of a is not positive definite");
  const Vector z = standard_normal_vector(rng, cond.mean.size());
  return cond.mean + llt.matrixU().solve(z);
}

double binv_log_target(const Matrix& binv, const Matrix& residuals, const MixingWeights& mixing,
                       const PriorSet& priors) {
  const auto T = static_cast<double>(residuals.rows());
  const double ld = log_abs_det(binv);
  if (!std::isfinite(ld)) return -std::numeric_limits<double>::infinity();
  const Matrix E = residuals * binv.transpose();
  const double quad = (mixing.w.array() * E.array().square()).sum();
  return T * ld - 0.5 * quad + priors.log_density_b(binv);
}

bool BinvUpdate::any_accepted() const {
  for (bool a : accepted)
    if (a) return true;
  return false;
}

BinvUpdate draw_binv(const Matrix& current, const Vector& coefficients,
                     const MixingWeights& mixing, const RegressionLayout& layout,
                     const PriorSet& priors, const Vector& proposal_scale, Rng& rng) {
  const auto N = layout.variables();
  const auto K = layout.regressors();
  const Matrix pi = Eigen::Map<const Matrix>(coefficients.data(), K, N).transpose();
  const Matrix U = layout.Y - layout.X * pi.transpose();

  BinvUpdate out{current, std::vector<bool>(static_cast<std::size_t>(N), false)};
  double current_target = binv_log_target(out.binv, U, mixing, priors);
  const double prior_precision = 1.0 / (priors.b_sd * priors.b_sd);

  for (Eigen::Index i = 0; i < N; ++i) {
    Matrix precision = U.transpose() * mixing.w.col(i).asDiagonal() * U;
    precision.diagonal().array() += prior_precision;
    Eigen::LLT<Matrix> llt(precision);
    if (llt.info() != Eigen::Success)
      throw NumericError("sampler", "Binv proposal precision is not positive definite");
    const Vector step = llt.matrixU().solve(standard_normal_vector(rng, N));

    Matrix proposal = out.binv;
    proposal.row(i) += proposal_scale(i) * step.transpose();
    const double proposal_target = binv_log_target(proposal, U, mixing, priors);
    const double log_u = std::log(uniform01(rng));
    if (std::isfinite(proposal_target) && log_u < proposal_target - current_target) {
      out.binv = std::move(proposal);
      current_target = proposal_target;
      out.accepted[static_cast<std::size_t>(i)] = true;
    }
  }
  return out;
}

double lambda_log_target(double lambda, const Eigen::Ref<const Vector>& w,
                         const PriorSet& priors, Eigen::Index shock) {
  if (!(lambda > 2.0)) return -std::numeric_limits<double>::infinity();
  return lambda_data_term(lambda, static_cast<double>(w.size()), w.array().log().sum(), w.sum()) +
         priors.log_density_lambda(lambda, shock);
}

LambdaUpdate draw_lambda(const Vector& current, const MixingWeights& mixing,
                         const PriorSet& priors, const Vector& proposal_scale, Rng& rng) {
  LambdaUpdate out{current, std::vector<bool>(static_cast<std::size_t>(current.size()), false)};
  const auto n = static_cast<double>(mixing.w.rows());
  for (Eigen::Index i = 0; i < current.size(); ++i) {
    const double sum_log_w = n > 0 ? mixing.w.col(i).array().log().sum() : 0.0;
    const double sum_w = n > 0 ? mixing.w.col(i).sum() : 0.0;
    auto target = [&](double lambda) {
      return lambda_data_term(lambda, n, sum_log_w, sum_w) +
             priors.log_density_lambda(lambda, i) + std::log(lambda - 2.0);
    };
    const double z = std::log(current(i) - 2.0);
    const double z_new = z + proposal_scale(i) * standard_normal(rng);
    const double lambda_new = 2.0 + std::exp(z_new);
    const double log_u = std::log(uniform01(rng));
    if (!std::isfinite(lambda_new) || !(lambda_new > 2.0)) continue;
    const double diff = target(lambda_new) - target(current(i));
    if (std::isfinite(diff) && log_u < diff) {
      out.lambda(i) = lambda_new;
      out.accepted[static_cast<std::size_t>(i)] = true;
    }
  }
  return out;
}

SamplerState initial_state(const RegressionLayout& layout) {
  const auto N = layout.variables();
  const auto fit = ols(layout);
  const Matrix sigma =
      fit.residuals.transpose() * fit.residuals / static_cast<double>(layout.observations());
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw DegenerateDataError("sampler", "least-squares residual covariance is singular");
  const Matrix L = llt.matrixL();
  const Matrix binv = L.triangularView<Eigen::Lower>().solve(Matrix::Identity(N, N));

  SamplerState s;
  s.params = StructuralParams::from_coefficients(fit.coefficients.transpose(), binv,
                                                 Vector::Constant(N, 10.0));
  s.mixing.w = Matrix::Ones(layout.observations(), N);
  return s;
}

GibbsKernel::GibbsKernel(PriorSet priors, const SamplerConfig& config)
    : priors_(std::move(priors)), config_(config) {
  priors_.validate();
  const auto N = priors_.variables();
  binv_scale_ = Vector::Constant(N, config.initial_binv_scale);
  lambda_scale_ = Vector::Constant(N, config.initial_lambda_scale);
  reset_counters();
}

void GibbsKernel::reset_counters() {
  const auto N = static_cast<std::size_t>(priors_.variables());
  binv_acc_.assign(N, {});
  lambda_acc_.assign(N, {});
}

void GibbsKernel::sweep(SamplerState& state, const RegressionLayout& layout, Rng& rng) {
  auto& params = state.params;
  state.mixing = draw_mixing(params, layout, rng);

  const Vector a = a_step(params.Binv, state.mixing, layout, priors_, rng);
  params = StructuralParams::from_coefficient_vector(a, layout.variables(), layout.lags,
                                                     params.Binv, params.lambda);

  auto binv = draw_binv(params.Binv, a, state.mixing, layout, priors_, binv_scale_, rng);
  params.Binv = std::move(binv.binv);
  for (std::size_t i = 0; i < binv.accepted.size(); ++i) {
    ++binv_acc_[i].proposed;
    binv_acc_[i].accepted += binv.accepted[i];
  }

  auto lambda = draw_lambda(params.lambda, state.mixing, priors_, lambda_scale_, rng);
  params.lambda = std::move(lambda.lambda);
  for (std::size_t i = 0; i < lambda.accepted.size(); ++i) {
    ++lambda_acc_[i].proposed;
    lambda_acc_[i].accepted += lambda.accepted[i];
  }
}

void GibbsKernel::adapt() {
  auto tune = [this](double& scale, const BlockAcceptance& acc) {
    if (acc.proposed == 0) return;
    const double rate = acc.rate();
    if (rate < config_.target_low)
      scale *= rate < 0.05 ? 0.5 : 0.8;
    else if (rate > config_.target_high)
      scale *= rate > 0.8 ? 2.0 : 1.25;
  };
  for (std::size_t i = 0; i < binv_acc_.size(); ++i) {
    tune(binv_scale_(static_cast<Eigen::Index>(i)), binv_acc_[i]);
    tune(lambda_scale_(static_cast<Eigen::Index>(i)), lambda_acc_[i]);
  }
  reset_counters();
}

Chain run_gibbs(const RegressionLayout& layout, const PriorSet& priors,
                const SamplerConfig& config) {
  return run_gibbs(layout, priors, config, initial_state(layout), 0);
}

Chain run_gibbs(const RegressionLayout& layout, const PriorSet& priors,
                const SamplerConfig& config, const SamplerState& start, std::uint64_t stream) {
  config.validate();
  if (priors.variables() != layout.variables() || priors.lags() != layout.lags)
    throw SizingError("sampler", "prior dimensions do not match the regression layout");
  const auto t0 = std::chrono::steady_clock::now();

  Rng rng = make_rng(config.seed, stream);
  GibbsKernel kernel(priors, config);
  SamplerState state = start;

  Chain chain;
  chain.draws.reserve(static_cast<std::size_t>((config.iterations - config.burn_in) / config.thin));
  for (long it = 0; it < config.iterations; ++it) {
    kernel.sweep(state, layout, rng);
    if (it < config.burn_in) {
      if ((it + 1) % config.adapt_window == 0) kernel.adapt();
      if (it + 1 == config.burn_in) kernel.reset_counters();
      continue;
    }
    if ((it - config.burn_in + 1) % config.thin == 0) {
      chain.draws.push_back(state.params);
      chain.stable.push_back(is_stable(state.params, config.stability_tol));
    }
  }

  auto& meta = chain.meta;
  meta.seed = config.seed;
  meta.burn_in = config.burn_in;
  meta.thin = config.thin;
  meta.total_iterations = config.iterations;
  for (std::size_t i = 0; i < kernel.binv_acceptance().size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    meta.binv_acceptance.push_back(kernel.binv_acceptance()[i].rate());
    meta.lambda_acceptance.push_back(kernel.lambda_acceptance()[i].rate());
    meta.binv_scale.push_back(kernel.binv_scale()(idx));
    meta.lambda_scale.push_back(kernel.lambda_scale()(idx));
    if (meta.binv_acceptance.back() < 0.01)
      meta.warnings.push_back("tuning failure: Binv row " + std::to_string(i + 1) +
                              " acceptance below 1%");
    if (meta.lambda_acceptance.back() < 0.01)
      meta.warnings.push_back("tuning failure: lambda " + std::to_string(i + 1) +
                              " acceptance below 1%");
  }
  meta.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return chain;
}

std::vector<Chain> run_chains(const RegressionLayout& layout, const PriorSet& priors,
                              const SamplerConfig& config, int n_chains) {
  if (n_chains < 1) throw ConfigError("need at least one chain");
  const SamplerState start = initial_state(layout);
  std::vector<Chain> chains(static_cast<std::size_t>(n_chains));
  if (n_chains == 1) {
    chains[0] = run_gibbs(layout, priors, config, start, 0);
    return chains;
  }
  std::vector<std::exception_ptr> errors(chains.size());
  std::vector<std::thread> workers;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    workers.emplace_back([&, c] {
      try {
        chains[c] = run_gibbs(layout, priors, config, start, c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return chains;
}

Chain merge_chains(const std::vector<Chain>& chains) {
  if (chains.empty()) return {};
  Chain out;
  out.meta = chains.front().meta;
  out.names = chains.front().names;
  const auto k = static_cast<double>(chains.size());
  for (std::size_t i = 0; i < out.meta.binv_acceptance.size(); ++i) {
    double b = 0.0, l = 0.0;
    for (const auto& c : chains) {
      b += c.meta.binv_acceptance[i];
      l += c.meta.lambda_acceptance[i];
    }
    out.meta.binv_acceptance[i] = b / k;
    out.meta.lambda_acceptance[i] = l / k;
  }
  out.meta.warnings.clear();
  out.meta.runtime_seconds = 0.0;
  for (const auto& c : chains) {
    out.draws.insert(out.draws.end(), c.draws.begin(), c.draws.end());
    out.stable.insert(out.stable.end(), c.stable.begin(), c.stable.end());
    out.meta.warnings.insert(out.meta.warnings.end(), c.meta.warnings.begin(),
                             c.meta.warnings.end());
    out.meta.runtime_seconds = std::max(out.meta.runtime_seconds, c.meta.runtime_seconds);
  }
  return out;
}

}  // namespace svart
