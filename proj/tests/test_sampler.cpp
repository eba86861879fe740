#include <algorithm>

#include "doctest.h"
#include "support.hpp"
#include "svart/chain_io.hpp"
#include "svart/diagnostics.hpp"
#include "svart/errors.hpp"
#include "svart/geweke.hpp"
#include "svart/sampler.hpp"
#include "svart/simulate.hpp"

using namespace svart;
using namespace testing;

namespace {

// Normalised CDF of exp(logf) on a uniform grid over [lo, hi].
struct GridCdf {
  double lo, h;
  std::vector<double> cdf;

  template <class F>
  GridCdf(F logf, double lo_, double hi, int n) : lo(lo_), h((hi - lo_) / n) {
    std::vector<double> lf(static_cast<std::size_t>(n));
    double mx = -1e300;
    for (int i = 0; i < n; ++i) {
      lf[static_cast<std::size_t>(i)] = logf(lo + (i + 0.5) * h);
      mx = std::max(mx, lf[static_cast<std::size_t>(i)]);
    }
    cdf.resize(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = 0; i < n; ++i)
      cdf[static_cast<std::size_t>(i) + 1] = cdf[static_cast<std::size_t>(i)] + std::exp(lf[static_cast<std::size_t>(i)] - mx);
    for (double& c : cdf) c /= cdf.back();
  }

  double operator()(double x) const {
    const double pos = (x - lo) / h;
    if (pos <= 0) return 0.0;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= cdf.size()) return 1.0;
    return cdf[i] + (pos - static_cast<double>(i)) * (cdf[i + 1] - cdf[i]);
  }
};

double ks_distance(std::vector<double> x, const GridCdf& F) {
  std::sort(x.begin(), x.end());
  const auto n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = F(x[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
  }
  return d;
}

RegressionLayout small_layout(Rng& rng, Eigen::Index N, int p, Eigen::Index T) {
  auto m = random_stable_model(rng, N, p, 0.6);
  m.lambda = Vector::Constant(N, 5.0);
  const Matrix pre = random_matrix(rng, p, N);
  const Matrix y = simulate_svar(m, pre, T, rng);
  return layout_from_series(pre, y, p);
}

}  // namespace

TEST_CASE("unit-scale t log density") {
  for (double x : {-3.0, -0.5, 0.0, 1.7}) {
    CHECK(log_student_t(x, 1.0) == doctest::Approx(-std::log(M_PI * (1.0 + x * x))));
    CHECK(log_student_t(x, 1e7) == doctest::Approx(-0.5 * std::log(2 * M_PI) - 0.5 * x * x).epsilon(1e-5));
  }
  double total = 0.0;
  for (double x = -2000.0; x < 2000.0; x += 0.001) total += std::exp(log_student_t(x, 3.0)) * 0.001;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("mixing weights follow their gamma conditional") {
  Rng rng = make_rng(71);
  const auto L = small_layout(rng, 2, 1, 6);
  auto draw = random_stable_model(rng, 2, 1);
  draw.lambda << 3.5, 9.0;
  const Matrix E = structural_residuals(draw, L);
  Matrix sum = Matrix::Zero(E.rows(), E.cols());
  const int n = 40000;
  for (int k = 0; k < n; ++k) sum += draw_mixing(draw, L, rng).w;
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index t = 0; t < E.rows(); ++t) {
      const double shape = 0.5 * (draw.lambda(i) + 1.0);
      const double rate = 0.5 * (draw.lambda(i) + E(t, i) * E(t, i));
      const double se = std::sqrt(shape) / rate / std::sqrt(n);
      CHECK(std::abs(sum(t, i) / n - shape / rate) < 4.0 * se);
    }
}

TEST_CASE("coefficient conditional is the exact Gaussian") {
  Rng rng = make_rng(73);
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::Index N = 1 + rep % 3;
    const int p = 1 + rep % 2;
    const auto L = small_layout(rng, N, p, 30);
    MinnesotaConfig cfg;
    const PriorSet pri = default_priors(cfg, N, p);
    const Matrix binv = random_impact(rng, N).inverse();
    MixingWeights mix{(random_matrix(rng, L.observations(), N).array().abs() + 0.2).matrix()};
    const auto cond = a_conditional(binv, mix, L, pri);

    // Conditional log density written directly from the weighted likelihood.
    auto logf = [&](const Vector& a) {
      const auto d = StructuralParams::from_coefficient_vector(a, N, p, binv, Vector::Constant(N, 5.0));
      const Matrix E = structural_residuals(d, L);
      return -0.5 * (mix.w.array() * E.array().square()).sum() + pri.log_density_a(a);
    };
    auto gauss = [&](const Vector& a) {
      const Vector d = a - cond.mean;
      return -0.5 * d.dot(cond.precision * d);
    };
    for (int k = 0; k < 5; ++k) {
      const Vector a1 = cond.mean + random_matrix(rng, cond.mean.size(), 1, 0.1);
      const Vector a2 = cond.mean + random_matrix(rng, cond.mean.size(), 1, 0.1);
      CHECK(logf(a1) - logf(a2) == doctest::Approx(gauss(a1) - gauss(a2)).epsilon(1e-8));
    }
  }
}

TEST_CASE("coefficient draws have the conditional moments") {
  Rng rng = make_rng(79);
  const auto L = small_layout(rng, 2, 1, 25);
  const PriorSet pri = default_priors(MinnesotaConfig{}, 2, 1);
  const Matrix binv = random_impact(rng, 2).inverse();
  MixingWeights mix{Matrix::Ones(L.observations(), 2)};
  const auto cond = a_conditional(binv, mix, L, pri);
  const Matrix cov = cond.precision.inverse();
  const int n = 40000;
  Vector s = Vector::Zero(6);
  Matrix ss = Matrix::Zero(6, 6);
  for (int k = 0; k < n; ++k) {
    const Vector d = draw_a(binv, mix, L, pri, rng) - cond.mean;
    s += d;
    ss += d * d.transpose();
  }
  for (Eigen::Index j = 0; j < 6; ++j) {
    const double sd = std::sqrt(cov(j, j));
    CHECK(std::abs(s(j) / n) < 4.0 * sd / std::sqrt(n));
    CHECK(ss(j, j) / n == doctest::Approx(cov(j, j)).epsilon(0.04));
  }
}

TEST_CASE("Binv Metropolis step leaves its target invariant") {
  Rng rng = make_rng(83);
  const auto L = small_layout(rng, 1, 1, 4);
  PriorSet pri = default_priors(MinnesotaConfig{}, 1, 1);
  pri.b_sd = 3.0;
  const Vector a = (Vector(2) << 0.1, 0.3).finished();
  MixingWeights mix{(Vector(L.observations()) << 0.5, 1.5, 0.8, 2.0).finished()};
  const Matrix U = L.Y - L.X * Eigen::Map<const Matrix>(a.data(), 2, 1);
  // The target is symmetric in b -> -b, so compare the law of |b|.
  auto logf = [&](double b) {
    return std::log(2.0) + binv_log_target(Matrix::Constant(1, 1, b), U, mix, pri);
  };
  const GridCdf F(logf, 0.0, 15.0, 30000);

  Matrix b = Matrix::Constant(1, 1, 1.0);
  const Vector scale = Vector::Constant(1, 1.5);
  std::vector<double> draws;
  for (int it = 0; it < 400000; ++it) {
    b = draw_binv(b, a, mix, L, pri, scale, rng).binv;
    if (it % 20 == 0) draws.push_back(std::abs(b(0, 0)));
  }
  const double ess = effective_sample_size(draws);
  const double d = ks_distance(draws, F);
  CHECK_MESSAGE(d < 1.95 / std::sqrt(ess), "KS " << d << " ess " << ess);
}

TEST_CASE("lambda Metropolis step leaves its target invariant") {
  Rng rng = make_rng(89);
  PriorSet pri = default_priors(MinnesotaConfig{}, 1, 1);
  const double true_lambda = 4.0;
  MixingWeights mix{Matrix(40, 1)};
  for (Eigen::Index t = 0; t < 40; ++t) mix.w(t, 0) = gamma_rate(rng, true_lambda / 2, true_lambda / 2);
  for (auto support : {LambdaSupport::Shift, LambdaSupport::Truncate}) {
    pri.lambda_support = support;
    auto logf = [&](double l) { return lambda_log_target(l, mix.w.col(0), pri, 0); };
    const GridCdf F(logf, 2.0, 200.0, 100000);
    Vector lambda = Vector::Constant(1, 10.0);
    const Vector scale = Vector::Constant(1, 0.8);
    std::vector<double> draws;
    for (int it = 0; it < 300000; ++it) {
      lambda = draw_lambda(lambda, mix, pri, scale, rng).lambda;
      if (it % 10 == 0) draws.push_back(lambda(0));
    }
    const double ess = effective_sample_size(draws);
    const double d = ks_distance(draws, F);
    CHECK_MESSAGE(d < 1.95 / std::sqrt(ess), "KS " << d << " ess " << ess);
  }
}

TEST_CASE("lambda step with no observations samples the prior") {
  Rng rng = make_rng(97);
  const PriorSet pri = default_priors(MinnesotaConfig{}, 1, 1);
  MixingWeights mix{Matrix(0, 1)};
  Vector lambda = Vector::Constant(1, 10.0);
  std::vector<double> draws;
  for (int it = 0; it < 400000; ++it) {
    lambda = draw_lambda(lambda, mix, pri, Vector::Constant(1, 1.5), rng).lambda;
    draws.push_back(lambda(0));
  }
  const auto bm = batch_mean(draws);
  CHECK(std::abs(bm.mean - 10.0) < 4.0 * bm.se);
}

TEST_CASE("effective sample size of AR(1) chains") {
  Rng rng = make_rng(101);
  for (double rho : {0.0, 0.5, 0.9}) {
    std::vector<double> x(200000);
    double v = 0.0;
    for (auto& xi : x) {
      v = rho * v + standard_normal(rng);
      xi = v;
    }
    const double expected = static_cast<double>(x.size()) * (1 - rho) / (1 + rho);
    CHECK(effective_sample_size(x) == doctest::Approx(expected).epsilon(0.1));
  }
  const std::vector<double> flat(100, 2.0);
  CHECK(effective_sample_size(flat) == 100.0);
}

TEST_CASE("split Rhat") {
  Rng rng = make_rng(103);
  std::vector<std::vector<double>> iid(4, std::vector<double>(5000));
  for (auto& c : iid)
    for (auto& x : c) x = standard_normal(rng);
  CHECK(split_rhat(iid) == doctest::Approx(1.0).epsilon(0.01));
  auto shifted = iid;
  for (auto& x : shifted[0]) x += 3.0;
  CHECK(split_rhat(shifted) > 1.2);
  CHECK(std::isnan(split_rhat({std::vector<double>(100, 1.0)})));
}

TEST_CASE("sampler configuration validation") {
  SamplerConfig c;
  c.iterations = 100;
  c.burn_in = 100;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.iterations = 200;
  c.thin = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.thin = 1;
  CHECK_NOTHROW(c.validate());
  const auto ps = SamplerConfig::paper_scale();
  CHECK(ps.iterations - ps.burn_in == 1'000'000);
  CHECK(ps.burn_in == 100'000);
}

TEST_CASE("kernel reports non-finite terms by name") {
  Rng rng = make_rng(107);
  const auto L = small_layout(rng, 2, 1, 20);
  const PriorSet pri = default_priors(MinnesotaConfig{}, 2, 1);
  auto d = random_stable_model(rng, 2, 1);
  CHECK(std::isfinite(log_posterior_kernel(d, L, pri)));
  d.Binv.setZero();
  try {
    log_posterior_kernel(d, L, pri);
    FAIL("expected a numeric error");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("det") != std::string::npos);
  }
}

TEST_CASE("runs are reproducible and chains are independent streams") {
  Rng rng = make_rng(109);
  const auto L = small_layout(rng, 2, 1, 80);
  const PriorSet pri = default_priors(MinnesotaConfig{}, 2, 1);
  SamplerConfig c;
  c.iterations = 300;
  c.burn_in = 100;
  c.thin = 2;
  c.seed = 9;
  const auto a = run_gibbs(L, pri, c);
  const auto b = run_gibbs(L, pri, c);
  REQUIRE(a.size() == 100);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(flatten_draw(a.draws[i]) == flatten_draw(b.draws[i]));

  const auto chains = run_chains(L, pri, c, 3);
  REQUIRE(chains.size() == 3);
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto solo = run_gibbs(L, pri, c, initial_state(L), s);
    CHECK(flatten_draw(solo.draws.back()) == flatten_draw(chains[s].draws.back()));
  }
  CHECK(flatten_draw(chains[0].draws.back()) != flatten_draw(chains[1].draws.back()));
  const auto merged = merge_chains(chains);
  CHECK(merged.size() == 300);
}

TEST_CASE("adaptation brings acceptance into a workable range") {
  Rng rng = make_rng(113);
  const auto L = small_layout(rng, 3, 1, 200);
  const PriorSet pri = default_priors(MinnesotaConfig{}, 3, 1);
  SamplerConfig c;
  c.iterations = 4000;
  c.burn_in = 2000;
  c.thin = 10;
  const auto chain = run_gibbs(L, pri, c);
  for (double r : chain.meta.binv_acceptance) CHECK((r > 0.15 && r < 0.55));
  for (double r : chain.meta.lambda_acceptance) CHECK((r > 0.15 && r < 0.55));
  CHECK(chain.meta.warnings.empty());
}

TEST_CASE("chain files round-trip exactly") {
  Rng rng = make_rng(127);
  Chain chain;
  chain.names = {"a", "b"};
  chain.meta.seed = 4;
  chain.meta.burn_in = 10;
  chain.meta.thin = 2;
  chain.meta.total_iterations = 30;
  for (int i = 0; i < 10; ++i) {
    chain.draws.push_back(random_stable_model(rng, 2, 2, i == 3 ? 1.2 : 0.5));
    chain.stable.push_back(is_stable(chain.draws.back()));
  }
  const auto dir = scratch_dir("chain_io");
  write_chain(dir / "c.csv", chain);
  const auto back = read_chain(dir / "c.csv");
  REQUIRE(back.size() == chain.size());
  for (std::size_t i = 0; i < chain.size(); ++i)
    CHECK(flatten_draw(back.draws[i]) == flatten_draw(chain.draws[i]));
  CHECK(back.stable == chain.stable);
  CHECK_FALSE(back.stable[3]);
  CHECK(back.names == chain.names);
  CHECK(back.meta.seed == 4);
  CHECK(draw_column_names(2, 1).front() == "a.1.const");
  CHECK(draw_column_names(2, 1).back() == "lambda.2");

  write_file(dir / "bad.csv", "nonsense\n");
  CHECK_THROWS(read_chain(dir / "bad.csv"));
}

TEST_CASE("joint-distribution test refuses zero iterations") {
  GewekeConfig g;
  g.successive_iterations = 0;
  const auto r = geweke_joint_test(g, geweke_test_prior(2, 1), SamplerConfig{});
  CHECK_FALSE(r.ok());
  CHECK(r.z.empty());
}
