#include "svart/simulate.hpp"

#include "svart/errors.hpp"

namespace svart {

Matrix simulate_svar(const StructuralParams& params, const Matrix& presample, Eigen::Index T,
                     Rng& rng, Matrix* shocks) {
  const auto N = params.variables();
  const int p = params.lags();
  if (presample.rows() != p || presample.cols() != N)
    throw SizingError("simulate", "presample must be p x N");
  const Matrix B = params.impact();

  Matrix y(p + T, N);
  y.topRows(p) = presample;
  if (shocks) shocks->resize(T, N);
  Vector eps(N);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (Eigen::Index i = 0; i < N; ++i) eps(i) = student_t(rng, params.lambda(i));
    Vector next = params.a0 + B * eps;
    for (int l = 1; l <= p; ++l) next.noalias() += params.A[l - 1] * y.row(p + t - l).transpose();
    y.row(p + t) = next.transpose();
    if (shocks) shocks->row(t) = eps.transpose();
  }
  return y.bottomRows(T);
}

RegressionLayout layout_from_series(const Matrix& presample, const Matrix& y, int lags) {
  TimeSeriesPanel panel;
  panel.values.resize(presample.rows() + y.rows(), y.cols());
  panel.values << presample, y;
  return build_layout(panel, lags, presample.rows());
}

TimeSeriesPanel simulate_panel(const StructuralParams& params, Eigen::Index T, Rng& rng,
                               Quarter start, Eigen::Index burn, Matrix* shocks) {
  params.validate();
  if (!is_stable(params)) throw NumericError("simulate", "refusing to simulate an unstable VAR");
  const Vector mu = unconditional_mean(params);
  const Matrix presample = mu.transpose().replicate(params.lags(), 1);
  Matrix all_shocks;
  const Matrix y = simulate_svar(params, presample, burn + T, rng, &all_shocks);

  TimeSeriesPanel panel;
  panel.values = y.bottomRows(T);
  for (Eigen::Index i = 0; i < params.variables(); ++i)
    panel.names.push_back("y" + std::to_string(i + 1));
  Quarter q = start;
  for (Eigen::Index t = 0; t < T; ++t, q = q.next()) panel.dates.push_back(q);
  if (shocks) *shocks = all_shocks.bottomRows(T);
  return panel;
}

}  // namespace svart
