#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "svart/analysis.hpp"
#include "svart/geweke.hpp"
#include "svart/labeling.hpp"
#include "svart/priors.hpp"
#include "svart/sampler.hpp"

namespace svart {

struct DataSettings {
  std::filesystem::path path;
  std::vector<std::string> transforms;  // one tag per variable
};

struct LagSettings {
  bool use_aic = false;
  int lags = 2;
  int max_lags = 10;
};

// Overrides of the default prior. Unset fields keep the defaults.
struct PriorSettings {
  MinnesotaConfig minnesota;
  bool estimate_sigma = true;  // sigma from univariate AR fits unless given
  double b_sd = 1000.0;
  double lambda_mean = 10.0;
  LambdaSupport lambda_support = LambdaSupport::Shift;
};

struct LabelingSettings {
  std::vector<ConstraintMatrix> constraints;  // one (single) or two (pair)
  long prior_draws = 1000000;
  double threshold = kBayesFactorThreshold;
  int normalize_variable = 0;
  int reference_passes = 2;
  std::uint64_t seed = 11;
};

struct AnalysisSettings {
  int horizon = 20;
  double band_level = 0.68;
  ShockScale shock_scale = ShockScale::Unit;
  HdMode hd_mode = HdMode::MedianOfDraws;
};

struct SimulateSettings {
  StructuralParams params;
  Eigen::Index observations = 400;
  std::uint64_t seed = 1;
  std::vector<std::string> names;
  Quarter start{1980, 1};
  Eigen::Index burn = 200;
  bool present = false;
};

struct RunConfig {
  std::optional<DataSettings> data;
  LagSettings lag;
  PriorSettings prior;
  SamplerConfig sampler;
  int chains = 1;
  LabelingSettings labeling;
  AnalysisSettings analysis;
  SimulateSettings simulate;
  GewekeConfig geweke;
  std::filesystem::path output_dir = "svart_out";
  nlohmann::json source;  // the parsed document, echoed into output metadata

  void validate() const;
};

// Parses and validates a configuration document. Unknown keys anywhere in the
// document raise ConfigError naming the offending key. Relative data paths are
// resolved against `base_dir`.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

// Reads {"a0": [...], "A": [[[...]]], "B" | "Binv": [[...]], "lambda": [...]};
// matrices are lists of rows.
StructuralParams params_from_json(const nlohmann::json& j);
nlohmann::json params_to_json(const StructuralParams& p);

}  // namespace svart
