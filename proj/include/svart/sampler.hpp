#pragma once

#include <functional>
#include <string>
#include <vector>

#include "svart/data.hpp"
#include "svart/priors.hpp"
#include "svart/random.hpp"
#include "svart/var_core.hpp"

namespace svart {

// Auxiliary precision multipliers of the normal / gamma representation of the
// t errors: eps_{i,t} | w ~ N(0, 1 / w_{i,t}).
struct MixingWeights {
  Matrix w;  // (T-p) x N
};

struct SamplerConfig {
  long iterations = 60000;  // total sweeps including burn-in
  long burn_in = 10000;
  int thin = 5;
  std::uint64_t seed = 1;
  int adapt_window = 50;
  double target_low = 0.25;  // adaptation keeps acceptance inside [low, high]
  double target_high = 0.40;
  double initial_binv_scale = 0.5;
  double initial_lambda_scale = 0.5;
  double stability_tol = kDefaultStabilityTol;

  void validate() const;

  // 1,100,000 sweeps with 100,000 burn-in, every post burn-in draw kept.
  static SamplerConfig paper_scale();
};

struct BlockAcceptance {
  long proposed = 0;
  long accepted = 0;
  double rate() const { return proposed ? static_cast<double>(accepted) / proposed : 0.0; }
};

struct ChainMeta {
  std::uint64_t seed = 0;
  long burn_in = 0;
  int thin = 1;
  long total_iterations = 0;
  // Post burn-in acceptance of each Binv row block and each lambda component.
  std::vector<double> binv_acceptance;
  std::vector<double> lambda_acceptance;
  std::vector<double> binv_scale;
  std::vector<double> lambda_scale;
  double runtime_seconds = 0.0;
  std::vector<std::string> warnings;
};

struct Chain {
  std::vector<StructuralDraw> draws;
  std::vector<bool> stable;  // per draw; unstable draws are kept but flagged
  ChainMeta meta;
  std::vector<std::string> names;

  std::size_t size() const { return draws.size(); }
  bool empty() const { return draws.empty(); }
  Eigen::Index variables() const { return draws.empty() ? 0 : draws.front().variables(); }
  int lags() const { return draws.empty() ? 0 : draws.front().lags(); }

  // Copy keeping only the stable draws.
  Chain stable_only() const;
};

// log f(x) of the unit-scale Student t with `lambda` degrees of freedom.
double log_student_t(double x, double lambda);

// Structural residuals eps_t = Binv (y_t - Pi x_t), one row per observation.
Matrix structural_residuals(const StructuralDraw& draw, const RegressionLayout& layout);

// (T-p) log|det Binv| + sum_{i,t} log f(eps_{i,t}; lambda_i) + log priors.
// Throws NumericError naming the offending term when the result is not finite.
double log_posterior_kernel(const StructuralDraw& draw, const RegressionLayout& layout,
                            const PriorSet& priors);

// w_{i,t} ~ Gamma((lambda_i + 1) / 2, rate (lambda_i + eps_{i,t}^2) / 2).
MixingWeights draw_mixing(const StructuralDraw& draw, const RegressionLayout& layout, Rng& rng);

// Posterior precision and mean of a | Binv, w (exact Gaussian conditional).
struct GaussianConditional {
  Matrix precision;
  Vector mean;
};
GaussianConditional a_conditional(const Matrix& binv, const MixingWeights& mixing,
                                  const RegressionLayout& layout, const PriorSet& priors);

Vector draw_a(const Matrix& binv, const MixingWeights& mixing, const RegressionLayout& layout,
              const PriorSet& priors, Rng& rng);

// Log target of Binv given a and w:
//   (T-p) log|det Binv| - 1/2 sum w_{i,t} eps_{i,t}^2 + log N(vec Binv; b_mean, b_sd^2 I).
double binv_log_target(const Matrix& binv, const Matrix& residuals, const MixingWeights& mixing,
                       const PriorSet& priors);

struct BinvUpdate {
  Matrix binv;
  std::vector<bool> accepted;  // per row block
  bool any_accepted() const;
};

// Random-walk Metropolis on vec(Binv), one row of Binv per block. The Gaussian
// proposal for row i has covariance scale_i^2 (S_i + I / b_sd^2)^{-1} with
// S_i = sum_t w_{i,t} u_t u_t'. S_i does not depend on Binv, so the proposal
// stays symmetric. Singular proposals are rejected.
BinvUpdate draw_binv(const Matrix& current, const Vector& coefficients,
                     const MixingWeights& mixing, const RegressionLayout& layout,
                     const PriorSet& priors, const Vector& proposal_scale, Rng& rng);

// Log target of lambda_i given its mixing column, on the lambda scale (no
// Jacobian): prior + sum_t log Gamma(w_t; lambda/2, rate lambda/2).
double lambda_log_target(double lambda, const Eigen::Ref<const Vector>& w,
                         const PriorSet& priors, Eigen::Index shock);

struct LambdaUpdate {
  Vector lambda;
  std::vector<bool> accepted;
};

// Per-shock random-walk Metropolis on log(lambda_i - 2) with the log-transform
// Jacobian included.
LambdaUpdate draw_lambda(const Vector& current, const MixingWeights& mixing,
                         const PriorSet& priors, const Vector& proposal_scale, Rng& rng);

struct SamplerState {
  StructuralParams params;
  MixingWeights mixing;
};

// Least-squares coefficients, Binv = inverse Cholesky factor of the residual
// covariance, lambda = 10.
SamplerState initial_state(const RegressionLayout& layout);

// One Gibbs sweep mixing -> a -> Binv -> lambda with per-block proposal scales.
class GibbsKernel {
 public:
  using AStep = std::function<Vector(const Matrix&, const MixingWeights&, const RegressionLayout&,
                                     const PriorSet&, Rng&)>;

  GibbsKernel(PriorSet priors, const SamplerConfig& config);

  void sweep(SamplerState& state, const RegressionLayout& layout, Rng& rng);

  // Adjusts the scales from the acceptance seen since the last call.
  void adapt();
  void reset_counters();

  const PriorSet& priors() const { return priors_; }
  const Vector& binv_scale() const { return binv_scale_; }
  const Vector& lambda_scale() const { return lambda_scale_; }
  const std::vector<BlockAcceptance>& binv_acceptance() const { return binv_acc_; }
  const std::vector<BlockAcceptance>& lambda_acceptance() const { return lambda_acc_; }

  // Replaces the coefficient step (used to check that validation catches a
  // broken sampler).
  AStep a_step = draw_a;

 private:
  PriorSet priors_;
  SamplerConfig config_;
  Vector binv_scale_;
  Vector lambda_scale_;
  std::vector<BlockAcceptance> binv_acc_;
  std::vector<BlockAcceptance> lambda_acc_;
};

// Runs one chain. Adaptation happens during burn-in only.
Chain run_gibbs(const RegressionLayout& layout, const PriorSet& priors,
                const SamplerConfig& config);

Chain run_gibbs(const RegressionLayout& layout, const PriorSet& priors,
                const SamplerConfig& config, const SamplerState& start, std::uint64_t stream);

// Independent chains on separate threads (streams 0..n-1 of config.seed).
std::vector<Chain> run_chains(const RegressionLayout& layout, const PriorSet& priors,
                              const SamplerConfig& config, int n_chains);

// Concatenates chains in order; meta is taken from the first chain with
// averaged acceptance rates.
Chain merge_chains(const std::vector<Chain>& chains);

}  // namespace svart
