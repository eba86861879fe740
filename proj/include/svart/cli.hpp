#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "svart/config.hpp"

namespace svart::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCompute = 1;
inline constexpr int kExitConfig = 2;

// Command-line overrides; they take precedence over the configuration file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> chains;
  std::optional<std::filesystem::path> out;
  bool paper_scale = false;
};

void apply_overrides(RunConfig& cfg, const Overrides& o);

// Data, lag order and prior implied by a configuration with a data section.
struct Problem {
  TimeSeriesPanel panel;
  int lags = 0;
  RegressionLayout layout;
  PriorSet priors;
};
Problem prepare_problem(const RunConfig& cfg);

// Prior used for labeling when no data section is available: sigma = 1
// unless configured.
PriorSet labeling_prior(const RunConfig& cfg, Eigen::Index n_vars, int lags);

int cmd_fit(const RunConfig& cfg, std::ostream& log);
int cmd_label(const RunConfig& cfg, const std::filesystem::path& chain_path, std::ostream& log);
int cmd_analyze(const RunConfig& cfg, const std::filesystem::path& chain_path, std::ostream& log);
int cmd_simulate(const RunConfig& cfg, std::ostream& log);
int cmd_geweke(const RunConfig& cfg, std::ostream& log);

// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

// manifest.json listing every file with its size and SHA-256.
void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const std::vector<std::filesystem::path>& files);

// Full driver: parses argv, dispatches, maps exceptions to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace svart::cli
