#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "svart/data.hpp"
#include "svart/sampler.hpp"

namespace svart {

enum class ShockScale { Unit, OneStdDev };
ShockScale parse_shock_scale(const std::string& s);
std::string_view to_string(ShockScale s);

// Standard deviation of a unit-scale t(lambda) variable.
double t_std_dev(double lambda);

// Type-7 sample quantile (linear interpolation between order statistics).
double quantile(std::vector<double> values, double prob);

// Pointwise summary across draws.
struct Band {
  double lower = 0.0;
  double median = 0.0;
  double upper = 0.0;
};

inline constexpr double kBandLower = 0.16;
inline constexpr double kBandUpper = 0.84;

Band summarize(const std::vector<double>& values, double lower = kBandLower,
               double upper = kBandUpper);

// Per-draw impulse responses: irf[h](k, i) is the response of variable k at
// horizon h to shock i.
std::vector<Matrix> draw_irf(const StructuralDraw& draw, int horizon, ShockScale scale);

// Forecast-error variance shares: fevd[h-1](k, i) is the share of shock i in
// the h-step forecast-error variance of variable k, h = 1..horizon.
std::vector<Matrix> draw_fevd(const StructuralDraw& draw, int horizon);

struct BandCube {
  // band[h](k, i)
  std::vector<std::vector<std::vector<Band>>> band;
  Band at(std::size_t h, Eigen::Index k, Eigen::Index i) const {
    return band[h][static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
  }
};

struct IrfResult {
  BandCube bands;  // horizons 0..H
  ShockScale scale = ShockScale::Unit;
  std::size_t used_draws = 0;
  std::size_t excluded_unstable = 0;
};

struct FevdResult {
  BandCube bands;  // horizons 1..H, stored at index h-1
  std::size_t used_draws = 0;
  std::size_t excluded_unstable = 0;
};

// `band_level` is the central credible mass (0.68 gives the 16th and 84th
// percentiles).
IrfResult irf(const Chain& chain, int horizon, ShockScale scale = ShockScale::Unit,
              double band_level = 0.68);
FevdResult fevd(const Chain& chain, int horizon, double band_level = 0.68);

// Additive decomposition of the sample y_t (t over the layout rows):
//   y_t = deterministic_t + initial_t + sum_i contribution_i,t
// deterministic: propagation of a0 from a zero presample;
// initial: propagation of the observed presample with a0 = 0;
// contribution_i: sum_{j<t} Theta_j(:, i) eps_hat_{i, t-j}.
struct DrawDecomposition {
  Matrix deterministic;               // T x N
  Matrix initial;                     // T x N
  std::vector<Matrix> contributions;  // per shock, T x N
  Matrix shocks;                      // T x N structural residuals

  Matrix reconstruction() const;
};

DrawDecomposition draw_historical_decomposition(const StructuralDraw& draw,
                                                const RegressionLayout& layout);

enum class HdMode { MedianOfDraws, MedianParameters };
HdMode parse_hd_mode(const std::string& s);

struct HdResult {
  Matrix deterministic;               // T x N, posterior median
  Matrix initial;                     // T x N
  std::vector<Matrix> contributions;  // per shock, T x N
  std::vector<Quarter> dates;
  HdMode mode = HdMode::MedianOfDraws;
  std::size_t used_draws = 0;
  std::size_t excluded_unstable = 0;
};

HdResult historical_decomposition(const Chain& chain, const RegressionLayout& layout,
                                  HdMode mode = HdMode::MedianOfDraws);

// Long-format tables: variable,shock,horizon,stat,value (stat is lower,
// median or upper) and
// variable,component,date,value.
void write_irf_table(std::ostream& out, const IrfResult& r, const std::vector<std::string>& names);
void write_fevd_table(std::ostream& out, const FevdResult& r, const std::vector<std::string>& names);
void write_hd_table(std::ostream& out, const HdResult& r, const std::vector<std::string>& names);

}  // namespace svart
