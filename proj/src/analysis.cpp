#include "svart/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include "svart/errors.hpp"

namespace svart {

ShockScale parse_shock_scale(const std::string& s) {
  if (s == "unit") return ShockScale::Unit;
  if (s == "one_sd" || s == "sd") return ShockScale::OneStdDev;
  throw ConfigError("unknown shock scale '" + s + "' (expected unit or one_sd)");
}

std::string_view to_string(ShockScale s) { return s == ShockScale::Unit ? "unit" : "one_sd"; }

HdMode parse_hd_mode(const std::string& s) {
  if (s == "median_of_draws") return HdMode::MedianOfDraws;
  if (s == "median_parameters") return HdMode::MedianParameters;
  throw ConfigError("unknown decomposition mode '" + s +
                    "' (expected median_of_draws or median_parameters)");
}

double t_std_dev(double lambda) {
  if (!(lambda > 2.0)) throw NumericError("analysis", "t variance requires lambda > 2");
  return std::sqrt(lambda / (lambda - 2.0));
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw Error("analysis", "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Band summarize(const std::vector<double>& values, double lower, double upper) {
  return {quantile(values, lower), quantile(values, 0.5), quantile(values, upper)};
}

std::vector<Matrix> draw_irf(const StructuralDraw& draw, int horizon, ShockScale scale) {
  auto theta = ma_coefficients(draw, horizon).theta;
  if (scale == ShockScale::OneStdDev) {
    Vector sd(draw.variables());
    for (Eigen::Index i = 0; i < sd.size(); ++i) sd(i) = t_std_dev(draw.lambda(i));
    for (auto& m : theta) m = m * sd.asDiagonal();
  }
  return theta;
}

std::vector<Matrix> draw_fevd(const StructuralDraw& draw, int horizon) {
  if (horizon < 1) throw ConfigError("FEVD horizon must be at least 1");
  const auto N = draw.variables();
  Vector var(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const double sd = t_std_dev(draw.lambda(i));
    var(i) = sd * sd;
  }
  const auto theta = ma_coefficients(draw, horizon - 1).theta;
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(horizon));
  Matrix acc = Matrix::Zero(N, N);  // acc(k, i) = sum_j theta_j(k,i)^2 var_i
  for (int h = 1; h <= horizon; ++h) {
    acc += theta[static_cast<std::size_t>(h - 1)].array().square().matrix() * var.asDiagonal();
    Matrix share = acc;
    for (Eigen::Index k = 0; k < N; ++k) {
      const double total = acc.row(k).sum();
      if (!(total > 0.0)) throw DegenerateDataError("analysis", "zero forecast-error variance");
      share.row(k) /= total;
    }
    out.push_back(std::move(share));
  }
  return out;
}

namespace {

std::vector<const StructuralDraw*> stable_draws(const Chain& chain, std::size_t& excluded) {
  if (chain.empty()) throw Error("analysis", "empty chain");
  std::vector<const StructuralDraw*> out;
  excluded = 0;
  for (std::size_t d = 0; d < chain.draws.size(); ++d) {
    const bool ok = d < chain.stable.size() ? chain.stable[d] : is_stable(chain.draws[d]);
    if (ok)
      out.push_back(&chain.draws[d]);
    else
      ++excluded;
  }
  if (out.empty()) throw Error("analysis", "no stable draws left after filtering");
  return out;
}

BandCube band_cube(const std::vector<std::vector<Matrix>>& per_draw, double band_level) {
  if (!(band_level > 0.0 && band_level < 1.0)) throw ConfigError("band level must lie in (0, 1)");
  const double lower = 0.5 - band_level / 2.0;
  const double upper = 0.5 + band_level / 2.0;
  BandCube cube;
  const std::size_t H = per_draw.front().size();
  const auto N = per_draw.front().front().rows();
  const auto M = per_draw.front().front().cols();
  std::vector<double> buf(per_draw.size());
  cube.band.resize(H);
  for (std::size_t h = 0; h < H; ++h) {
    cube.band[h].assign(static_cast<std::size_t>(N), std::vector<Band>(static_cast<std::size_t>(M)));
    for (Eigen::Index k = 0; k < N; ++k)
      for (Eigen::Index i = 0; i < M; ++i) {
        for (std::size_t d = 0; d < per_draw.size(); ++d) buf[d] = per_draw[d][h](k, i);
        cube.band[h][static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = summarize(buf, lower, upper);
      }
  }
  return cube;
}

Matrix elementwise_median(const std::vector<Matrix>& ms) {
  Matrix out(ms.front().rows(), ms.front().cols());
  std::vector<double> buf(ms.size());
  for (Eigen::Index r = 0; r < out.rows(); ++r)
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      for (std::size_t d = 0; d < ms.size(); ++d) buf[d] = ms[d](r, c);
      out(r, c) = quantile(buf, 0.5);
    }
  return out;
}

// Runs x_t = sum_l A_l x_{t-l} + input_t for t = 0..T-1 with x before the
// sample given by `start` (p x N, chronological).
Matrix propagate(const StructuralDraw& draw, const Matrix& start, const Matrix& input) {
  const int p = draw.lags();
  const auto T = input.rows();
  const auto N = input.cols();
  Matrix x(p + T, N);
  x.topRows(p) = start;
  for (Eigen::Index t = 0; t < T; ++t) {
    Vector v = input.row(t).transpose();
    for (int l = 1; l <= p; ++l) v += draw.A[static_cast<std::size_t>(l - 1)] * x.row(p + t - l).transpose();
    x.row(p + t) = v.transpose();
  }
  return x.bottomRows(T);
}

void put(std::ostream& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, res.ptr - buf);
}

std::string name_of(const std::vector<std::string>& names, Eigen::Index k) {
  const auto idx = static_cast<std::size_t>(k);
  return idx < names.size() ? names[idx] : "y" + std::to_string(k + 1);
}

void write_cube(std::ostream& out, const BandCube& cube, int first_horizon,
                const std::vector<std::string>& names) {
  out << "variable,shock,horizon,stat,value\n";
  for (std::size_t h = 0; h < cube.band.size(); ++h)
    for (std::size_t k = 0; k < cube.band[h].size(); ++k)
      for (std::size_t i = 0; i < cube.band[h][k].size(); ++i) {
        const Band& b = cube.band[h][k][i];
        const std::string prefix = name_of(names, static_cast<Eigen::Index>(k)) + ",shock" +
                                   std::to_string(i + 1) + "," +
                                   std::to_string(static_cast<int>(h) + first_horizon) + ",";
        out << prefix << "lower,";
        put(out, b.lower);
        out << '\n' << prefix << "median,";
        put(out, b.median);
        out << '\n' << prefix << "upper,";
        put(out, b.upper);
        out << '\n';
      }
}

}  // namespace

IrfResult irf(const Chain& chain, int horizon, ShockScale scale, double band_level) {
  if (horizon < 0) throw ConfigError("IRF horizon must be non-negative");
  IrfResult r;
  r.scale = scale;
  const auto draws = stable_draws(chain, r.excluded_unstable);
  std::vector<std::vector<Matrix>> per_draw;
  per_draw.reserve(draws.size());
  for (const auto* d : draws) per_draw.push_back(draw_irf(*d, horizon, scale));
  r.bands = band_cube(per_draw, band_level);
  r.used_draws = draws.size();
  return r;
}

FevdResult fevd(const Chain& chain, int horizon, double band_level) {
  FevdResult r;
  const auto draws = stable_draws(chain, r.excluded_unstable);
  std::vector<std::vector<Matrix>> per_draw;
  per_draw.reserve(draws.size());
  for (const auto* d : draws) per_draw.push_back(draw_fevd(*d, horizon));
  r.bands = band_cube(per_draw, band_level);
  r.used_draws = draws.size();
  return r;
}

Matrix DrawDecomposition::reconstruction() const {
  Matrix y = deterministic + initial;
  for (const auto& c : contributions) y += c;
  return y;
}

DrawDecomposition draw_historical_decomposition(const StructuralDraw& draw,
                                                const RegressionLayout& layout) {
  const auto N = layout.variables();
  const auto T = layout.observations();
  if (draw.variables() != N || draw.lags() != layout.lags)
    throw SizingError("analysis", "draw and data dimensions differ");
  const Matrix B = draw.impact();
  DrawDecomposition out;
  out.shocks = (layout.Y - layout.X * draw.coefficients().transpose()) * draw.Binv.transpose();
  const Matrix zero_start = Matrix::Zero(layout.lags, N);
  out.deterministic = propagate(draw, zero_start, draw.a0.transpose().replicate(T, 1));
  out.initial = propagate(draw, layout.presample, Matrix::Zero(T, N));
  out.contributions.reserve(static_cast<std::size_t>(N));
  for (Eigen::Index i = 0; i < N; ++i)
    out.contributions.push_back(propagate(draw, zero_start, out.shocks.col(i) * B.col(i).transpose()));
  return out;
}

HdResult historical_decomposition(const Chain& chain, const RegressionLayout& layout, HdMode mode) {
  HdResult r;
  r.mode = mode;
  r.dates = layout.dates;
  const auto draws = stable_draws(chain, r.excluded_unstable);
  r.used_draws = draws.size();
  const auto N = layout.variables();

  if (mode == HdMode::MedianParameters) {
    std::vector<Matrix> a0s, binvs, lambdas;
    std::vector<std::vector<Matrix>> As(static_cast<std::size_t>(draws.front()->lags()));
    for (const auto* d : draws) {
      a0s.push_back(d->a0);
      binvs.push_back(d->Binv);
      lambdas.push_back(d->lambda);
      for (std::size_t l = 0; l < As.size(); ++l) As[l].push_back(d->A[l]);
    }
    StructuralDraw med;
    med.a0 = elementwise_median(a0s);
    med.Binv = elementwise_median(binvs);
    med.lambda = elementwise_median(lambdas);
    for (const auto& a : As) med.A.push_back(elementwise_median(a));
    const auto dec = draw_historical_decomposition(med, layout);
    r.deterministic = dec.deterministic;
    r.initial = dec.initial;
    r.contributions = dec.contributions;
    return r;
  }

  std::vector<Matrix> det, init;
  std::vector<std::vector<Matrix>> contrib(static_cast<std::size_t>(N));
  for (const auto* d : draws) {
    auto dec = draw_historical_decomposition(*d, layout);
    det.push_back(std::move(dec.deterministic));
    init.push_back(std::move(dec.initial));
    for (std::size_t i = 0; i < contrib.size(); ++i) contrib[i].push_back(std::move(dec.contributions[i]));
  }
  r.deterministic = elementwise_median(det);
  r.initial = elementwise_median(init);
  for (const auto& c : contrib) r.contributions.push_back(elementwise_median(c));
  return r;
}

void write_irf_table(std::ostream& out, const IrfResult& r, const std::vector<std::string>& names) {
  write_cube(out, r.bands, 0, names);
}

void write_fevd_table(std::ostream& out, const FevdResult& r, const std::vector<std::string>& names) {
  write_cube(out, r.bands, 1, names);
}

void write_hd_table(std::ostream& out, const HdResult& r, const std::vector<std::string>& names) {
  out << "variable,component,date,value\n";
  const auto T = r.deterministic.rows();
  const auto N = r.deterministic.cols();
  auto emit = [&](Eigen::Index k, const std::string& component, const Matrix& m) {
    for (Eigen::Index t = 0; t < T; ++t) {
      const auto idx = static_cast<std::size_t>(t);
      out << name_of(names, k) << ',' << component << ','
          << (idx < r.dates.size() ? r.dates[idx].str() : std::to_string(t + 1)) << ',';
      put(out, m(t, k));
      out << '\n';
    }
  };
  for (Eigen::Index k = 0; k < N; ++k) {
    emit(k, "deterministic", r.deterministic);
    emit(k, "initial", r.initial);
    for (std::size_t i = 0; i < r.contributions.size(); ++i)
      emit(k, "shock" + std::to_string(i + 1), r.contributions[i]);
  }
}

}  // namespace svart
