#pragma once

#include "svart/data.hpp"
#include "svart/random.hpp"
#include "svart/var_core.hpp"

namespace svart {

// Simulates T periods of the structural VAR with unit-scale t shocks,
// starting from `presample` (p x N, chronological). When `shocks` is given it
// receives the T x N structural shocks.
Matrix simulate_svar(const StructuralParams& params, const Matrix& presample, Eigen::Index T,
                     Rng& rng, Matrix* shocks = nullptr);

// Regression layout of a simulated path whose presample is known.
RegressionLayout layout_from_series(const Matrix& presample, const Matrix& y, int lags);

// Stable-process simulation for experiments: starts at the unconditional
// mean, discards `burn` periods, and labels rows with consecutive quarters
// from `start`. Refuses unstable parameters.
TimeSeriesPanel simulate_panel(const StructuralParams& params, Eigen::Index T, Rng& rng,
                               Quarter start = {1980, 1}, Eigen::Index burn = 200,
                               Matrix* shocks = nullptr);

}  // namespace svart
