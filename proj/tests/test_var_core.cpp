#include <complex>

#include "doctest.h"
#include "support.hpp"
#include "svart/errors.hpp"

using namespace svart;
using namespace testing;

namespace {

// Largest root modulus of det(I z^p - A_1 z^{p-1} - ... - A_p) for N = 1,
// p = 2 via the quadratic formula.
double ar2_root_radius(double a1, double a2) {
  const std::complex<double> disc = std::sqrt(std::complex<double>(a1 * a1 + 4.0 * a2, 0.0));
  return std::max(std::abs((a1 + disc) / 2.0), std::abs((a1 - disc) / 2.0));
}

// 2x2 eigenvalues from trace and determinant.
double two_by_two_radius(const Matrix& A) {
  const double tr = A.trace();
  const double det = A.determinant();
  const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4.0 * det, 0.0));
  return std::max(std::abs((tr + disc) / 2.0), std::abs((tr - disc) / 2.0));
}

StructuralParams scalar_model(std::vector<double> a, double b = 1.0) {
  StructuralParams p;
  p.a0 = Vector::Zero(1);
  for (double v : a) p.A.push_back(Matrix::Constant(1, 1, v));
  p.Binv = Matrix::Constant(1, 1, 1.0 / b);
  p.lambda = Vector::Constant(1, 5.0);
  return p;
}

}  // namespace

TEST_CASE("spectral radius matches closed-form roots") {
  Rng rng = make_rng(31);
  for (int rep = 0; rep < 200; ++rep) {
    const double a1 = 2.0 * uniform01(rng) - 1.0;
    const double a2 = 1.2 * uniform01(rng) - 0.6;
    const auto m = scalar_model({a1, a2});
    CHECK(spectral_radius(m) == doctest::Approx(ar2_root_radius(a1, a2)).epsilon(1e-10));
  }
  for (int rep = 0; rep < 200; ++rep) {
    StructuralParams m;
    m.a0 = Vector::Zero(2);
    m.A = {random_matrix(rng, 2, 2, 0.7)};
    m.Binv = Matrix::Identity(2, 2);
    m.lambda = Vector::Constant(2, 5.0);
    CHECK(spectral_radius(m) == doctest::Approx(two_by_two_radius(m.A[0])).epsilon(1e-10));
  }
}

TEST_CASE("stability examples") {
  CHECK(is_stable(scalar_model({0.5})));
  CHECK_FALSE(is_stable(scalar_model({1.0})));
  CHECK_FALSE(is_stable(scalar_model({1.0 - 1e-9})));  // within tolerance of the unit circle
  CHECK(is_stable(scalar_model({1.0 - 1e-6})));
  CHECK_FALSE(is_stable(scalar_model({1.2, 0.1})));
  CHECK(spectral_radius(scalar_model({-0.9})) == doctest::Approx(0.9));
}

TEST_CASE("power-iteration radius agrees with the eigendecomposition") {
  Rng rng = make_rng(37);
  for (int rep = 0; rep < 50; ++rep) {
    const auto m = random_stable_model(rng, 1 + rep % 4, 1 + rep % 3, 0.3 + 0.6 * uniform01(rng));
    CHECK(spectral_radius_power(m) == doctest::Approx(spectral_radius(m)).epsilon(1e-6));
  }
}

TEST_CASE("MA coefficients equal companion powers") {
  Rng rng = make_rng(41);
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::Index N = 1 + rep % 4;
    const int p = 1 + rep % 3;
    const auto m = random_stable_model(rng, N, p);
    const auto ma = ma_coefficients(m, 20);
    const Matrix C = reference_companion(m);
    const Matrix B = m.Binv.inverse();
    Matrix Cj = Matrix::Identity(N * p, N * p);
    for (int j = 0; j <= 20; ++j) {
      const Matrix psi = Cj.topLeftCorner(N, N);
      CHECK((ma.psi[static_cast<std::size_t>(j)] - psi).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((ma.theta[static_cast<std::size_t>(j)] - psi * B).cwiseAbs().maxCoeff() < 1e-10);
      Cj = C * Cj;
    }
  }
}

TEST_CASE("scalar AR(1) moving average") {
  const auto ma = ma_coefficients(scalar_model({0.5}, 2.0), 3);
  CHECK(ma.theta[0](0, 0) == doctest::Approx(2.0));
  CHECK(ma.theta[1](0, 0) == doctest::Approx(1.0));
  CHECK(ma.theta[2](0, 0) == doctest::Approx(0.5));
  CHECK(ma.theta[3](0, 0) == doctest::Approx(0.25));
}

TEST_CASE("unconditional mean is the fixed point of the noiseless recursion") {
  Rng rng = make_rng(43);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index N = 1 + rep % 3;
    const int p = 1 + rep % 2;
    const auto m = random_stable_model(rng, N, p, 0.7);
    std::vector<Vector> path(static_cast<std::size_t>(p), Vector::Zero(N));
    for (int t = 0; t < 400; ++t) {
      Vector v = m.a0;
      for (int l = 1; l <= p; ++l) v += m.A[static_cast<std::size_t>(l - 1)] * path[path.size() - static_cast<std::size_t>(l)];
      path.push_back(v);
    }
    CHECK((unconditional_mean(m) - path.back()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("coefficient vector layout and round trip") {
  Rng rng = make_rng(47);
  const auto m = random_stable_model(rng, 3, 2);
  const Vector a = m.coefficient_vector();
  const Matrix pi = m.coefficients();
  const Eigen::Index K = 3 * 2 + 1;
  for (Eigen::Index i = 0; i < 3; ++i) {
    CHECK(a(i * K) == m.a0(i));
    for (int l = 1; l <= 2; ++l)
      for (Eigen::Index q = 0; q < 3; ++q)
        CHECK(a(i * K + lag_column(3, l, q)) == m.A[static_cast<std::size_t>(l - 1)](i, q));
  }
  const auto back = StructuralParams::from_coefficient_vector(a, 3, 2, m.Binv, m.lambda);
  CHECK(back.coefficients() == pi);
  CHECK(StructuralParams::from_coefficients(pi, m.Binv, m.lambda).coefficient_vector() == a);
}

TEST_CASE("validation and conditioning guards") {
  auto m = scalar_model({0.5});
  m.lambda(0) = 2.0;
  CHECK_THROWS(m.validate());
  m.lambda(0) = 5.0;
  CHECK_NOTHROW(m.validate());

  StructuralParams bad;
  bad.a0 = Vector::Zero(2);
  bad.A = {Matrix::Zero(2, 2)};
  bad.Binv = (Matrix(2, 2) << 1.0, 1.0, 1.0, 1.0 + 1e-14).finished();
  bad.lambda = Vector::Constant(2, 5.0);
  CHECK_THROWS_AS(bad.impact(), NumericError);
  CHECK(condition_number(Matrix::Identity(3, 3)) == doctest::Approx(1.0));
  CHECK(condition_number((Matrix(2, 2) << 4.0, 0.0, 0.0, 0.5).finished()) == doctest::Approx(8.0));
}
