#include "svart/geweke.hpp"

#include <cmath>

#include "svart/errors.hpp"
#include "svart/simulate.hpp"

namespace svart {

namespace {

struct TestFunctions {
  std::vector<std::string> names;

  TestFunctions(Eigen::Index N, int p) {
    const Eigen::Index na = N * (N * p + 1);
    for (Eigen::Index k = 0; k < na; ++k) {
      names.push_back("a[" + std::to_string(k) + "]");
      names.push_back("a[" + std::to_string(k) + "]^2");
    }
    for (Eigen::Index k = 0; k < N * N; ++k) {
      names.push_back("b[" + std::to_string(k) + "]");
      names.push_back("b[" + std::to_string(k) + "]^2");
    }
    for (Eigen::Index i = 0; i < N; ++i) {
      names.push_back("lambda[" + std::to_string(i) + "]");
      names.push_back("lambda[" + std::to_string(i) + "]^2");
    }
    for (Eigen::Index i = 0; i < N; ++i) names.push_back("mean tanh(y[" + std::to_string(i) + "])");
    names.push_back("mean tanh(y[0]) tanh(y[1])");
  }

  std::vector<double> evaluate(const StructuralParams& params, const Matrix& y) const {
    std::vector<double> g;
    g.reserve(names.size());
    const Vector a = params.coefficient_vector();
    for (Eigen::Index k = 0; k < a.size(); ++k) {
      g.push_back(a(k));
      g.push_back(a(k) * a(k));
    }
    for (Eigen::Index k = 0; k < params.Binv.size(); ++k) {
      const double b = params.Binv.data()[k];
      g.push_back(b);
      g.push_back(b * b);
    }
    for (Eigen::Index i = 0; i < params.lambda.size(); ++i) {
      g.push_back(params.lambda(i));
      g.push_back(params.lambda(i) * params.lambda(i));
    }
    const Matrix th = y.array().tanh().matrix();
    for (Eigen::Index i = 0; i < y.cols(); ++i) g.push_back(th.col(i).mean());
    g.push_back(y.cols() > 1 ? th.col(0).cwiseProduct(th.col(1)).mean() : 0.0);
    return g;
  }
};

struct Moments {
  std::vector<double> sum, sum_sq;
  long n = 0;
  explicit Moments(std::size_t k) : sum(k, 0.0), sum_sq(k, 0.0) {}
  void add(const std::vector<double>& g) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      sum[j] += g[j];
      sum_sq[j] += g[j] * g[j];
    }
    ++n;
  }
  double mean(std::size_t j) const { return sum[j] / static_cast<double>(n); }
  double variance(std::size_t j) const {
    const double m = mean(j);
    return (sum_sq[j] / static_cast<double>(n) - m * m) * static_cast<double>(n) /
           static_cast<double>(n - 1);
  }
};

}  // namespace

double GewekeReport::fraction_within(double bound) const {
  if (z.empty()) return 0.0;
  std::size_t inside = 0;
  for (double v : z) inside += std::abs(v) < bound;
  return static_cast<double>(inside) / static_cast<double>(z.size());
}

double GewekeReport::max_abs_z() const {
  double m = 0.0;
  for (double v : z) m = std::max(m, std::abs(v));
  return m;
}

PriorSet geweke_test_prior(Eigen::Index n_vars, int lags) {
  PriorSet prior;
  const Eigen::Index K = n_vars * lags + 1;
  prior.a_mean = Vector::Zero(n_vars * K);
  prior.a_var.resize(n_vars * K);
  for (Eigen::Index eq = 0; eq < n_vars; ++eq) {
    prior.a_var(eq * K) = 0.25;
    for (int l = 1; l <= lags; ++l)
      for (Eigen::Index q = 0; q < n_vars; ++q)
        prior.a_var(eq * K + lag_column(n_vars, l, q)) = eq == q ? 0.16 : 0.09;
  }
  const Matrix b_mean = 2.0 * Matrix::Identity(n_vars, n_vars);
  prior.b_mean = Eigen::Map<const Vector>(b_mean.data(), b_mean.size());
  prior.b_sd = 0.4;
  prior.lambda_mean = Vector::Constant(n_vars, 10.0);
  prior.lambda_support = LambdaSupport::Shift;
  return prior;
}

GewekeReport geweke_joint_test(const GewekeConfig& config, const PriorSet& priors,
                               const SamplerConfig& sampler) {
  return geweke_joint_test(config, priors, sampler, draw_a);
}

GewekeReport geweke_joint_test(const GewekeConfig& config, const PriorSet& priors,
                               const SamplerConfig& sampler, const GibbsKernel::AStep& a_step) {
  GewekeReport report;
  if (config.marginal_draws < 2 || config.successive_iterations < 2) {
    report.error = "geweke: zero-iteration run";
    return report;
  }
  if (config.variables > 2 || config.observations > 20)
    throw ConfigError("the joint-distribution test is meant for N <= 2, T <= 20");
  if (priors.variables() != config.variables || priors.lags() != config.lags)
    throw SizingError("sampler", "Geweke prior does not match the test dimensions");
  if (config.batches < 2 || config.successive_iterations < config.batches)
    throw ConfigError("need at least two batches and one draw per batch");

  const TestFunctions tf(config.variables, config.lags);
  const std::size_t K = tf.names.size();
  const Matrix presample = Matrix::Zero(config.lags, config.variables);

  // Marginal-conditional simulator.
  Rng rng_mc = make_rng(config.seed, 0);
  Moments mc(K);
  for (long m = 0; m < config.marginal_draws; ++m) {
    const auto theta = draw_from_prior(priors, rng_mc);
    const Matrix y = simulate_svar(theta, presample, config.observations, rng_mc);
    mc.add(tf.evaluate(theta, y));
  }

  // Successive-conditional simulator.
  Rng rng = make_rng(config.seed, 1);
  GibbsKernel kernel(priors, sampler);
  kernel.a_step = a_step;
  SamplerState state;
  state.params = draw_from_prior(priors, rng);
  Matrix y = simulate_svar(state.params, presample, config.observations, rng);

  for (long it = 0; it < config.successive_burn_in; ++it) {
    kernel.sweep(state, layout_from_series(presample, y, config.lags), rng);
    y = simulate_svar(state.params, presample, config.observations, rng);
    if ((it + 1) % sampler.adapt_window == 0) kernel.adapt();
  }

  const long per_batch = config.successive_iterations / config.batches;
  const long total = per_batch * config.batches;
  Moments sc(K);
  std::vector<Moments> batch_moments;
  batch_moments.reserve(static_cast<std::size_t>(config.batches));
  for (long it = 0; it < total; ++it) {
    if (it % per_batch == 0) batch_moments.emplace_back(K);
    kernel.sweep(state, layout_from_series(presample, y, config.lags), rng);
    y = simulate_svar(state.params, presample, config.observations, rng);
    const auto g = tf.evaluate(state.params, y);
    sc.add(g);
    batch_moments.back().add(g);
  }

  report.statistics = tf.names;
  for (std::size_t j = 0; j < K; ++j) {
    const double m1 = mc.mean(j);
    const double m2 = sc.mean(j);
    double batch_var = 0.0;
    for (const auto& b : batch_moments) batch_var += (b.mean(j) - m2) * (b.mean(j) - m2);
    batch_var /= static_cast<double>(batch_moments.size() - 1);
    const double se2 = batch_var / static_cast<double>(batch_moments.size());
    const double se1 = mc.variance(j) / static_cast<double>(mc.n);
    report.marginal_mean.push_back(m1);
    report.successive_mean.push_back(m2);
    report.z.push_back((m1 - m2) / std::sqrt(se1 + se2));
  }
  return report;
}

}  // namespace svart
