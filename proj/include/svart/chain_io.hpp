#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "svart/sampler.hpp"

namespace svart {

inline constexpr int kChainFormatVersion = 1;

// Column layout of a persisted draw: a (equation-major, see
// StructuralParams::coefficient_vector), then vec(Binv) column-major, then
// lambda. Names are 1-based:
//   a.<eq>.const, a.<eq>.L<lag>.<var>, binv.<row>.<col>, lambda.<shock>
std::vector<std::string> draw_column_names(Eigen::Index n_vars, int lags);

Vector flatten_draw(const StructuralDraw& draw);
StructuralDraw unflatten_draw(const Vector& flat, Eigen::Index n_vars, int lags);

// Writes `path` (one row per draw) and the sidecar `path + ".meta.json"`.
// `config` is embedded in the sidecar verbatim.
void write_chain(const std::filesystem::path& path, const Chain& chain,
                 const nlohmann::json& config = nlohmann::json::object());

// Reads a chain written by write_chain. Stability flags are recomputed.
Chain read_chain(const std::filesystem::path& path);

nlohmann::json read_chain_meta(const std::filesystem::path& path);

std::filesystem::path meta_path(const std::filesystem::path& chain_path);

}  // namespace svart
