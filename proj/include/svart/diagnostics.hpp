#pragma once

#include <span>
#include <string>
#include <vector>

#include "svart/sampler.hpp"

namespace svart {

// Effective sample size by Geyer's initial monotone sequence estimator.
// A constant series returns its length.
double effective_sample_size(std::span<const double> x);

// Split-Rhat over one or more equal-length chains (each split in half).
// Returns NaN when the within-chain variance is zero.
double split_rhat(const std::vector<std::vector<double>>& chains);

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double ess = 0.0;
  double rhat = 0.0;
  bool degenerate = false;  // zero within-chain variance; Rhat undefined
};

struct ChainDiagnostics {
  std::vector<ParameterSummary> parameters;
  std::vector<double> binv_acceptance;
  std::vector<double> lambda_acceptance;
  std::size_t draws = 0;
  std::size_t unstable_draws = 0;
};

ChainDiagnostics diagnostics(const Chain& chain);

// Same, treating `chains` as independent chains for Rhat.
ChainDiagnostics diagnostics(const std::vector<Chain>& chains);

void write_diagnostics(const std::string& path, const ChainDiagnostics& diag);

}  // namespace svart
