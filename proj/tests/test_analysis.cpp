#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "svart/analysis.hpp"
#include "svart/errors.hpp"
#include "svart/simulate.hpp"

using namespace svart;
using namespace testing;

namespace {

Chain single_draw_chain(const StructuralDraw& d) {
  Chain c;
  c.draws = {d};
  c.stable = {is_stable(d)};
  return c;
}

StructuralDraw scalar_ar1(double a, double b, double lambda = 5.0) {
  StructuralDraw d;
  d.a0 = Vector::Zero(1);
  d.A = {Matrix::Constant(1, 1, a)};
  d.Binv = Matrix::Constant(1, 1, 1.0 / b);
  d.lambda = Vector::Constant(1, lambda);
  return d;
}

}  // namespace

TEST_CASE("type-7 quantiles") {
  const std::vector<double> x{4.0, 1.0, 3.0, 2.0};
  CHECK(quantile(x, 0.0) == 1.0);
  CHECK(quantile(x, 1.0) == 4.0);
  CHECK(quantile(x, 0.5) == doctest::Approx(2.5));
  CHECK(quantile(x, 0.16) == doctest::Approx(1.48));
  CHECK(quantile(x, 0.84) == doctest::Approx(3.52));
  CHECK(quantile({7.0}, 0.3) == 7.0);
  CHECK_THROWS(quantile({}, 0.5));
}

TEST_CASE("band ordering holds for arbitrary samples") {
  Rng rng = make_rng(191);
  for (int rep = 0; rep < 300; ++rep) {
    std::vector<double> x(1 + static_cast<std::size_t>(uniform01(rng) * 50));
    for (auto& v : x) v = standard_normal(rng) * std::exp(standard_normal(rng));
    const Band b = summarize(x);
    CHECK(b.lower <= b.median);
    CHECK(b.median <= b.upper);
  }
}

TEST_CASE("scalar AR(1) impulse response") {
  const auto r = irf(single_draw_chain(scalar_ar1(0.5, 2.0)), 4);
  CHECK(r.bands.at(0, 0, 0).median == doctest::Approx(2.0));
  CHECK(r.bands.at(1, 0, 0).median == doctest::Approx(1.0));
  CHECK(r.bands.at(2, 0, 0).median == doctest::Approx(0.5));
  // single draw: bands collapse
  CHECK(r.bands.at(3, 0, 0).lower == r.bands.at(3, 0, 0).upper);
}

TEST_CASE("draw-level IRFs equal companion powers") {
  Rng rng = make_rng(193);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index N = 1 + rep % 3;
    const int p = 1 + rep % 3;
    const auto m = random_stable_model(rng, N, p);
    const auto th = draw_irf(m, 12, ShockScale::Unit);
    const Matrix C = reference_companion(m);
    const Matrix B = m.Binv.inverse();
    Matrix Cj = Matrix::Identity(N * p, N * p);
    for (int j = 0; j <= 12; ++j) {
      CHECK((th[static_cast<std::size_t>(j)] - Cj.topLeftCorner(N, N) * B).cwiseAbs().maxCoeff() < 1e-10);
      Cj = C * Cj;
    }
  }
}

TEST_CASE("one-sd responses scale unit responses by the t standard deviation") {
  Rng rng = make_rng(197);
  for (int rep = 0; rep < 20; ++rep) {
    const auto m = random_stable_model(rng, 3, 2);
    const auto unit = draw_irf(m, 8, ShockScale::Unit);
    const auto sd = draw_irf(m, 8, ShockScale::OneStdDev);
    for (std::size_t h = 0; h < unit.size(); ++h)
      for (Eigen::Index i = 0; i < 3; ++i) {
        const double s = std::sqrt(m.lambda(i) / (m.lambda(i) - 2.0));
        CHECK((sd[h].col(i) - s * unit[h].col(i)).cwiseAbs().maxCoeff() < 1e-12);
      }
  }
}

TEST_CASE("FEVD basic cases") {
  const auto one = draw_fevd(scalar_ar1(0.7, 1.5), 10);
  for (const auto& m : one) CHECK(m(0, 0) == doctest::Approx(1.0));

  StructuralDraw d;
  d.a0 = Vector::Zero(3);
  d.A = {(Matrix(3, 3) << 0.5, 0.2, 0.1, 0.1, 0.4, 0.0, 0.0, 0.3, 0.2).finished()};
  d.Binv = Vector(Vector::Constant(3, 1.0).cwiseQuotient((Vector(3) << 1.0, 2.0, 0.5).finished())).asDiagonal();
  d.lambda = Vector::Constant(3, 6.0);
  const auto f = draw_fevd(d, 1);
  CHECK((f[0] - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("FEVD shares lie in [0, 1] and sum to one") {
  Rng rng = make_rng(199);
  for (int rep = 0; rep < 50; ++rep) {
    const auto m = random_stable_model(rng, 1 + rep % 5, 1 + rep % 3);
    for (const auto& s : draw_fevd(m, 20)) {
      CHECK((s.array() >= 0.0).all());
      CHECK((s.array() <= 1.0).all());
      CHECK((s.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("FEVD matches simulated forecast errors") {
  Rng rng = make_rng(211);
  auto m = random_stable_model(rng, 2, 1, 0.7);
  m.lambda << 6.0, 9.0;
  const Matrix B = m.Binv.inverse();
  const int H = 4;
  const auto shares = draw_fevd(m, H);
  // H-step forecast error from a zero state, driven by shock i only, via the
  // VAR recursion itself.
  const int n = 200000;
  Matrix var = Matrix::Zero(2, 2);  // var(k, i)
  for (int r = 0; r < n; ++r)
    for (Eigen::Index i = 0; i < 2; ++i) {
      Vector y = Vector::Zero(2);
      for (int h = 0; h < H; ++h) y = m.A[0] * y + B.col(i) * student_t(rng, m.lambda(i));
      var.col(i) += y.cwiseProduct(y);
    }
  for (Eigen::Index k = 0; k < 2; ++k)
    for (Eigen::Index i = 0; i < 2; ++i)
      CHECK(std::abs(var(k, i) / var.row(k).sum() - shares[H - 1](k, i)) < 0.01);
}

TEST_CASE("historical decomposition: zero shocks leave deterministic plus initial") {
  Rng rng = make_rng(223);
  const auto m = random_stable_model(rng, 2, 2);
  const Matrix pre = random_matrix(rng, 2, 2);
  Matrix y(30, 2);
  Matrix hist(32, 2);
  hist.topRows(2) = pre;
  for (int t = 0; t < 30; ++t) {
    Vector v = m.a0;
    for (int l = 1; l <= 2; ++l) v += m.A[static_cast<std::size_t>(l - 1)] * hist.row(2 + t - l).transpose();
    hist.row(2 + t) = v.transpose();
  }
  y = hist.bottomRows(30);
  const auto L = layout_from_series(pre, y, 2);
  const auto dec = draw_historical_decomposition(m, L);
  CHECK(dec.shocks.cwiseAbs().maxCoeff() < 1e-10);
  for (const auto& c : dec.contributions) CHECK(c.cwiseAbs().maxCoeff() < 1e-9);
  CHECK((dec.deterministic + dec.initial - y).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("historical decomposition: one-shot shock traces the impulse response") {
  const auto m = scalar_ar1(0.6, 1.5);
  const Matrix pre = Matrix::Zero(1, 1);
  Matrix y(8, 1);
  double prev = 0.0;
  for (int t = 0; t < 8; ++t) {
    const double eps = t == 0 ? 1.0 : 0.0;
    prev = 0.6 * prev + 1.5 * eps;
    y(t, 0) = prev;
  }
  const auto dec = draw_historical_decomposition(m, layout_from_series(pre, y, 1));
  const auto th = draw_irf(m, 7, ShockScale::Unit);
  for (int t = 0; t < 8; ++t) CHECK(dec.contributions[0](t, 0) == doctest::Approx(th[static_cast<std::size_t>(t)](0, 0)));
}

TEST_CASE("historical decomposition adds up on simulated data") {
  Rng rng = make_rng(227);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index N = 1 + rep % 4;
    const int p = 1 + rep % 3;
    const auto truth = random_stable_model(rng, N, p);
    const Matrix pre = random_matrix(rng, p, N);
    const auto L = layout_from_series(pre, simulate_svar(truth, pre, 120, rng), p);
    const auto d = random_stable_model(rng, N, p);  // any parameter draw
    const auto dec = draw_historical_decomposition(d, L);
    CHECK((dec.reconstruction() - L.Y).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("chain-level summaries exclude unstable draws") {
  Chain c;
  c.draws = {scalar_ar1(0.5, 1.0), scalar_ar1(1.1, 1.0), scalar_ar1(0.3, 2.0)};
  for (const auto& d : c.draws) c.stable.push_back(is_stable(d));
  const auto r = irf(c, 3);
  CHECK(r.used_draws == 2);
  CHECK(r.excluded_unstable == 1);
  const auto f = fevd(c, 3);
  CHECK(f.excluded_unstable == 1);

  Chain bad;
  bad.draws = {scalar_ar1(1.5, 1.0)};
  bad.stable = {false};
  CHECK_THROWS_AS(irf(bad, 3), Error);
}

TEST_CASE("median-parameter decomposition of a single draw equals the draw") {
  Rng rng = make_rng(229);
  const auto m = random_stable_model(rng, 2, 1);
  const Matrix pre = random_matrix(rng, 1, 2);
  const auto L = layout_from_series(pre, simulate_svar(m, pre, 40, rng), 1);
  const auto a = historical_decomposition(single_draw_chain(m), L, HdMode::MedianParameters);
  const auto b = historical_decomposition(single_draw_chain(m), L, HdMode::MedianOfDraws);
  CHECK((a.deterministic - b.deterministic).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((a.contributions[1] - b.contributions[1]).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("long-format tables") {
  const auto r = irf(single_draw_chain(scalar_ar1(0.5, 2.0)), 2);
  std::ostringstream s;
  write_irf_table(s, r, {"gdp"});
  const std::string t = s.str();
  CHECK(t.rfind("variable,shock,horizon,stat,value\n", 0) == 0);
  CHECK(t.find("gdp,shock1,1,median,1\n") != std::string::npos);
  CHECK(std::count(t.begin(), t.end(), '\n') == 1 + 3 * 3);
}
