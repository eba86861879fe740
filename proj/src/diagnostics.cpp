#include "svart/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "svart/chain_io.hpp"
#include "svart/errors.hpp"

namespace svart {

namespace {

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance_of(std::span<const double> x) {
  const double m = mean_of(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

}  // namespace

double effective_sample_size(std::span<const double> x) {
  const auto n = x.size();
  if (n < 4) return static_cast<double>(n);
  const double m = mean_of(x);
  std::vector<double> c(x.size());
  for (std::size_t i = 0; i < n; ++i) c[i] = x[i] - m;
  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += c[i] * c[i + lag];
    return s / static_cast<double>(n);
  };
  const double gamma0 = autocov(0);
  if (gamma0 <= 0.0) return static_cast<double>(n);

  // tau = -1 + 2 sum_k Gamma_k, Gamma_k = rho_{2k} + rho_{2k+1}, truncated at
  // the first negative pair and forced monotone.
  double tau = -1.0;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = (autocov(2 * k) + autocov(2 * k + 1)) / gamma0;
    if (pair <= 0.0) break;
    pair = std::min(pair, previous);
    previous = pair;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / std::log10(static_cast<double>(n)));
  return static_cast<double>(n) / tau;
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
  std::vector<std::span<const double>> halves;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    if (half < 2) continue;
    halves.emplace_back(c.data(), half);
    halves.emplace_back(c.data() + c.size() - half, half);
  }
  if (halves.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  std::size_t n = halves.front().size();
  for (const auto& h : halves) n = std::min(n, h.size());
  const auto m = static_cast<double>(halves.size());
  const auto nd = static_cast<double>(n);

  std::vector<double> means;
  double within = 0.0;
  for (auto h : halves) {
    h = h.first(n);
    means.push_back(mean_of(h));
    within += variance_of(h);
  }
  within /= m;
  if (!(within > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double between = nd * variance_of(means);
  const double var_plus = (nd - 1.0) / nd * within + between / nd;
  return std::sqrt(var_plus / within);
}

ChainDiagnostics diagnostics(const std::vector<Chain>& chains) {
  if (chains.empty() || chains.front().empty())
    throw Error("sampler", "diagnostics need a nonempty chain");
  const auto N = chains.front().variables();
  const int p = chains.front().lags();
  const auto names = draw_column_names(N, p);

  std::vector<std::vector<std::vector<double>>> series(
      names.size(), std::vector<std::vector<double>>(chains.size()));
  ChainDiagnostics out;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (std::size_t d = 0; d < chains[c].draws.size(); ++d) {
      const Vector flat = flatten_draw(chains[c].draws[d]);
      for (std::size_t k = 0; k < names.size(); ++k)
        series[k][c].push_back(flat(static_cast<Eigen::Index>(k)));
      if (d < chains[c].stable.size() && !chains[c].stable[d]) ++out.unstable_draws;
    }
    out.draws += chains[c].draws.size();
  }

  for (std::size_t k = 0; k < names.size(); ++k) {
    ParameterSummary s;
    s.name = names[k];
    std::vector<double> all;
    for (const auto& c : series[k]) {
      all.insert(all.end(), c.begin(), c.end());
      s.ess += effective_sample_size(c);
    }
    s.mean = mean_of(all);
    s.sd = all.size() > 1 ? std::sqrt(variance_of(all)) : 0.0;
    s.rhat = split_rhat(series[k]);
    s.degenerate = std::isnan(s.rhat);
    out.parameters.push_back(std::move(s));
  }
  out.binv_acceptance = chains.front().meta.binv_acceptance;
  out.lambda_acceptance = chains.front().meta.lambda_acceptance;
  return out;
}

ChainDiagnostics diagnostics(const Chain& chain) { return diagnostics(std::vector<Chain>{chain}); }

void write_diagnostics(const std::string& path, const ChainDiagnostics& diag) {
  std::ofstream out(path);
  if (!out) throw Error("sampler", "cannot write '" + path + "'");
  out.precision(10);
  out << "parameter,mean,sd,ess,rhat,degenerate\n";
  for (const auto& p : diag.parameters)
    out << p.name << ',' << p.mean << ',' << p.sd << ',' << p.ess << ','
        << (p.degenerate ? std::string("NA") : std::to_string(p.rhat)) << ','
        << (p.degenerate ? 1 : 0) << '\n';
  for (std::size_t i = 0; i < diag.binv_acceptance.size(); ++i)
    out << "acceptance.binv." << i + 1 << ',' << diag.binv_acceptance[i] << ",,,,0\n";
  for (std::size_t i = 0; i < diag.lambda_acceptance.size(); ++i)
    out << "acceptance.lambda." << i + 1 << ',' << diag.lambda_acceptance[i] << ",,,,0\n";
}

}  // namespace svart
