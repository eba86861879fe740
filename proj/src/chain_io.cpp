#include "svart/chain_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "svart/errors.hpp"

namespace svart {

namespace {
constexpr const char* kMagic = "# svart-chain";
}

std::vector<std::string> draw_column_names(Eigen::Index n_vars, int lags) {
  std::vector<std::string> names;
  for (Eigen::Index eq = 1; eq <= n_vars; ++eq) {
    const auto e = std::to_string(eq);
    names.push_back("a." + e + ".const");
    for (int l = 1; l <= lags; ++l)
      for (Eigen::Index v = 1; v <= n_vars; ++v)
        names.push_back("a." + e + ".L" + std::to_string(l) + "." + std::to_string(v));
  }
  for (Eigen::Index c = 1; c <= n_vars; ++c)
    for (Eigen::Index r = 1; r <= n_vars; ++r)
      names.push_back("binv." + std::to_string(r) + "." + std::to_string(c));
  for (Eigen::Index i = 1; i <= n_vars; ++i) names.push_back("lambda." + std::to_string(i));
  return names;
}

Vector flatten_draw(const StructuralDraw& draw) {
  const Vector a = draw.coefficient_vector();
  const auto N = draw.variables();
  Vector out(a.size() + N * N + N);
  out << a, Eigen::Map<const Vector>(draw.Binv.data(), N * N), draw.lambda;
  return out;
}

StructuralDraw unflatten_draw(const Vector& flat, Eigen::Index n_vars, int lags) {
  const Eigen::Index na = n_vars * (n_vars * lags + 1);
  if (flat.size() != na + n_vars * n_vars + n_vars)
    throw SizingError("chain-io", "flattened draw has the wrong length");
  const Matrix binv = Eigen::Map<const Matrix>(flat.data() + na, n_vars, n_vars);
  return StructuralParams::from_coefficient_vector(flat.head(na), n_vars, lags, binv,
                                                   flat.tail(n_vars));
}

std::filesystem::path meta_path(const std::filesystem::path& chain_path) {
  return chain_path.string() + ".meta.json";
}

void write_chain(const std::filesystem::path& path, const Chain& chain,
                 const nlohmann::json& config) {
  if (chain.empty()) throw Error("chain-io", "refusing to write an empty chain");
  const auto N = chain.variables();
  const int p = chain.lags();
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("chain-io", "cannot write '" + path.string() + "'");
    out << kMagic << ' ' << kChainFormatVersion << '\n';
    const auto names = draw_column_names(N, p);
    out << "draw";
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    char buf[32];
    for (std::size_t d = 0; d < chain.draws.size(); ++d) {
      out << d;
      const Vector flat = flatten_draw(chain.draws[d]);
      for (Eigen::Index k = 0; k < flat.size(); ++k) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, flat(k));
        out << ',' << std::string_view(buf, static_cast<std::size_t>(end - buf));
      }
      out << '\n';
    }
  }

  nlohmann::json meta;
  meta["format"] = "svart-chain";
  meta["version"] = kChainFormatVersion;
  meta["variables"] = N;
  meta["lags"] = p;
  meta["names"] = chain.names;
  meta["draws"] = chain.draws.size();
  meta["seed"] = chain.meta.seed;
  meta["burn_in"] = chain.meta.burn_in;
  meta["thin"] = chain.meta.thin;
  meta["total_iterations"] = chain.meta.total_iterations;
  meta["acceptance"] = {{"binv_rows", chain.meta.binv_acceptance},
                        {"lambda", chain.meta.lambda_acceptance}};
  meta["proposal_scale"] = {{"binv_rows", chain.meta.binv_scale},
                            {"lambda", chain.meta.lambda_scale}};
  meta["warnings"] = chain.meta.warnings;
  meta["config"] = config;
  std::ofstream out(meta_path(path));
  if (!out) throw Error("chain-io", "cannot write '" + meta_path(path).string() + "'");
  out << meta.dump(2) << '\n';
}

nlohmann::json read_chain_meta(const std::filesystem::path& path) {
  std::ifstream in(meta_path(path));
  if (!in) throw Error("chain-io", "missing metadata sidecar '" + meta_path(path).string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("chain-io", std::string("bad metadata sidecar: ") + e.what());
  }
}

Chain read_chain(const std::filesystem::path& path) {
  const auto meta = read_chain_meta(path);
  if (meta.value("format", "") != "svart-chain")
    throw Error("chain-io", "sidecar does not describe an svart chain");
  if (meta.value("version", 0) != kChainFormatVersion)
    throw Error("chain-io", "unsupported chain format version");
  const auto N = meta.at("variables").get<Eigen::Index>();
  const int p = meta.at("lags").get<int>();

  std::ifstream in(path);
  if (!in) throw Error("chain-io", "cannot open '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  if (line.rfind(kMagic, 0) != 0) throw Error("chain-io", "missing chain header line");
  std::getline(in, line);
  const auto expected = draw_column_names(N, p);
  const auto width = static_cast<Eigen::Index>(expected.size());

  Chain chain;
  chain.names = meta.value("names", std::vector<std::string>{});
  std::size_t row = 2;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    Vector flat(width);
    std::size_t pos = line.find(',');
    Eigen::Index k = 0;
    while (pos != std::string::npos) {
      const std::size_t next = line.find(',', pos + 1);
      const std::string_view cell(line.data() + pos + 1,
                                  (next == std::string::npos ? line.size() : next) - pos - 1);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || k >= width) throw ParseError("bad chain value", row, k + 2);
      flat(k++) = v;
      pos = next;
    }
    if (k != width) throw ParseError("wrong number of chain columns", row, k + 1);
    chain.draws.push_back(unflatten_draw(flat, N, p));
    chain.stable.push_back(is_stable(chain.draws.back()));
  }
  auto& m = chain.meta;
  m.seed = meta.value("seed", std::uint64_t{0});
  m.burn_in = meta.value("burn_in", 0L);
  m.thin = meta.value("thin", 1);
  m.total_iterations = meta.value("total_iterations", 0L);
  if (meta.contains("acceptance")) {
    m.binv_acceptance = meta["acceptance"].value("binv_rows", std::vector<double>{});
    m.lambda_acceptance = meta["acceptance"].value("lambda", std::vector<double>{});
  }
  m.warnings = meta.value("warnings", std::vector<std::string>{});
  return chain;
}

}  // namespace svart
