#pragma once

#include <string>
#include <vector>

#include "svart/sampler.hpp"

namespace svart {

struct GewekeConfig {
  Eigen::Index variables = 2;
  int lags = 1;
  Eigen::Index observations = 12;  // rows of the regression layout
  long marginal_draws = 200000;
  long successive_iterations = 400000;
  long successive_burn_in = 2000;  // proposal scales adapt here, then freeze
  int batches = 100;               // batch means for the successive-conditional errors
  std::uint64_t seed = 7;
};

struct GewekeReport {
  std::vector<std::string> statistics;
  std::vector<double> marginal_mean;
  std::vector<double> successive_mean;
  std::vector<double> z;
  std::string error;  // set when the test could not run

  bool ok() const { return error.empty(); }
  double fraction_within(double bound) const;
  double max_abs_z() const;
};

// Informative prior for the joint-distribution test: the default diffuse
// prior would generate data on wildly different scales.
PriorSet geweke_test_prior(Eigen::Index n_vars, int lags);

// Compares the moments of (parameters, data) from
//   (1) prior draw followed by a data draw (marginal-conditional), and
//   (2) the Gibbs kernel alternating with fresh data draws
//       (successive-conditional),
// using the same test functions. A correct kernel leaves the joint
// distribution invariant, so the z-scores are standard normal.
GewekeReport geweke_joint_test(const GewekeConfig& config, const PriorSet& priors,
                               const SamplerConfig& sampler);

// Variant whose kernel has a replaced coefficient step.
GewekeReport geweke_joint_test(const GewekeConfig& config, const PriorSet& priors,
                               const SamplerConfig& sampler, const GibbsKernel::AStep& a_step);

}  // namespace svart
