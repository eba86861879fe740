#include "svart/config.hpp"

#include <fstream>
#include <set>

#include "svart/errors.hpp"

namespace svart {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, std::set<std::string> allowed) {
  if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
  }
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + where + "." + key + "': " + e.what());
  }
}

template <class T>
void maybe(const json& obj, const std::string& key, const std::string& where, T& out) {
  if (obj.contains(key)) out = get<T>(obj, key, where);
}

Matrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError("'" + what + "' must be a non-empty list of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ConfigError("'" + what + "' rows must have equal length");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Vector vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError("'" + what + "' must be a list of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

LambdaSupport parse_lambda_support(const std::string& s) {
  if (s == "shift") return LambdaSupport::Shift;
  if (s == "truncate") return LambdaSupport::Truncate;
  throw ConfigError("lambda_support must be 'shift' or 'truncate'");
}

ConstraintMatrix parse_constraint(const json& j, std::size_t index) {
  const std::string where = "labeling.constraints[" + std::to_string(index) + "]";
  check_keys(j, where, {"name", "signs", "horizons"});
  if (!j.contains("signs")) throw ConfigError("'" + where + "' needs 'signs'");
  std::vector<int> signs;
  for (const auto& s : j.at("signs")) {
    if (s.is_string()) {
      const auto str = s.get<std::string>();
      if (str == "+") signs.push_back(1);
      else if (str == "-") signs.push_back(-1);
      else if (str == "0") signs.push_back(0);
      else throw ConfigError("'" + where + ".signs' entries must be '+', '-' or '0'");
    } else {
      const int v = s.get<int>();
      if (v < -1 || v > 1) throw ConfigError("'" + where + ".signs' entries must be -1, 0 or 1");
      signs.push_back(v);
    }
  }
  auto R = ConstraintMatrix::from_signs(signs, j.value("name", "R" + std::to_string(index + 1)));
  if (j.contains("horizons")) R.horizons = get<std::vector<int>>(j, "horizons", where);
  R.validate();
  return R;
}

}  // namespace

StructuralParams params_from_json(const json& j) {
  check_keys(j, "params", {"a0", "A", "B", "Binv", "lambda"});
  for (const char* key : {"a0", "A", "lambda"})
    if (!j.contains(key)) throw ConfigError(std::string("params need '") + key + "'");
  if (j.contains("B") == j.contains("Binv")) throw ConfigError("params need exactly one of 'B' and 'Binv'");
  StructuralParams p;
  try {
    p.a0 = vector_from_json(j.at("a0"), "a0");
    for (const auto& a : j.at("A")) p.A.push_back(matrix_from_json(a, "A"));
    p.lambda = vector_from_json(j.at("lambda"), "lambda");
    if (j.contains("Binv")) {
      p.Binv = matrix_from_json(j.at("Binv"), "Binv");
    } else {
      const Matrix B = matrix_from_json(j.at("B"), "B");
      if (B.rows() != B.cols()) throw ConfigError("'B' must be square");
      const Eigen::FullPivLU<Matrix> lu(B);
      if (!lu.isInvertible()) throw ConfigError("'B' is singular");
      p.Binv = lu.inverse();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad parameter value: ") + e.what());
  }
  try {
    p.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid parameters: ") + e.what());
  }
  return p;
}

json params_to_json(const StructuralParams& p) {
  json j;
  j["a0"] = std::vector<double>(p.a0.data(), p.a0.data() + p.a0.size());
  j["A"] = json::array();
  for (const auto& a : p.A) j["A"].push_back(matrix_to_json(a));
  j["Binv"] = matrix_to_json(p.Binv);
  j["B"] = matrix_to_json(p.impact());
  j["lambda"] = std::vector<double>(p.lambda.data(), p.lambda.data() + p.lambda.size());
  return j;
}

void RunConfig::validate() const {
  if (lag.lags < 1) throw ConfigError("lags must be at least 1");
  if (lag.max_lags < 1) throw ConfigError("max_lags must be at least 1");
  if (chains < 1) throw ConfigError("chains must be at least 1");
  try {
    sampler.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!(prior.b_sd > 0.0)) throw ConfigError("prior.b_sd must be positive");
  if (!(prior.lambda_mean > 2.0)) throw ConfigError("prior.lambda_mean must exceed 2");
  if (labeling.constraints.size() > 2) throw ConfigError("at most two constraint sets are supported");
  if (labeling.prior_draws < 1) throw ConfigError("labeling.prior_draws must be positive");
  if (!(labeling.threshold > 0.0)) throw ConfigError("labeling.threshold must be positive");
  if (labeling.reference_passes < 0) throw ConfigError("labeling.reference_passes must be >= 0");
  if (analysis.horizon < 1) throw ConfigError("analysis.horizon must be at least 1");
  if (!(analysis.band_level > 0.0 && analysis.band_level < 1.0))
    throw ConfigError("analysis.band_level must lie in (0, 1)");
  if (data) {
    for (const auto& c : labeling.constraints)
      if (c.variables() != static_cast<Eigen::Index>(data->transforms.size()))
        throw ConfigError("constraint '" + c.name + "' does not cover every variable");
    if (labeling.normalize_variable < 0 ||
        labeling.normalize_variable >= static_cast<int>(data->transforms.size()))
      throw ConfigError("labeling.normalize_variable out of range");
  }
}

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  check_keys(doc, "",
             {"data", "lags", "prior", "sampler", "labeling", "analysis", "simulate", "geweke",
              "output"});
  RunConfig cfg;
  cfg.source = doc;

  if (doc.contains("data")) {
    const auto& d = doc.at("data");
    check_keys(d, "data", {"path", "transforms"});
    DataSettings ds;
    if (!d.contains("path") || !d.contains("transforms"))
      throw ConfigError("'data' needs 'path' and 'transforms'");
    ds.path = get<std::string>(d, "path", "data");
    if (ds.path.is_relative() && !base_dir.empty()) ds.path = base_dir / ds.path;
    ds.transforms = get<std::vector<std::string>>(d, "transforms", "data");
    for (const auto& t : ds.transforms) {
      try {
        parse_transform(t);
      } catch (const std::exception& e) {
        throw ConfigError(e.what());
      }
    }
    cfg.data = ds;
  }

  if (doc.contains("lags")) {
    const auto& l = doc.at("lags");
    check_keys(l, "lags", {"mode", "p", "p_max"});
    const std::string mode = l.value("mode", "fixed");
    if (mode != "fixed" && mode != "aic") throw ConfigError("lags.mode must be 'fixed' or 'aic'");
    cfg.lag.use_aic = mode == "aic";
    maybe(l, "p", "lags", cfg.lag.lags);
    maybe(l, "p_max", "lags", cfg.lag.max_lags);
  }

  if (doc.contains("prior")) {
    const auto& p = doc.at("prior");
    check_keys(p, "prior",
               {"kappa1", "kappa2", "kappa3", "kappa4", "sigma", "b_sd", "lambda_mean",
                "lambda_support"});
    auto& m = cfg.prior.minnesota;
    maybe(p, "kappa1", "prior", m.kappa1);
    maybe(p, "kappa2", "prior", m.kappa2);
    maybe(p, "kappa3", "prior", m.kappa3);
    maybe(p, "kappa4", "prior", m.kappa4);
    if (p.contains("sigma")) {
      m.sigma = vector_from_json(p.at("sigma"), "prior.sigma");
      cfg.prior.estimate_sigma = false;
    }
    maybe(p, "b_sd", "prior", cfg.prior.b_sd);
    maybe(p, "lambda_mean", "prior", cfg.prior.lambda_mean);
    if (p.contains("lambda_support"))
      cfg.prior.lambda_support = parse_lambda_support(get<std::string>(p, "lambda_support", "prior"));
  }

  if (doc.contains("sampler")) {
    const auto& s = doc.at("sampler");
    check_keys(s, "sampler",
               {"iterations", "burn_in", "thin", "seed", "adapt_window", "chains", "target_low",
                "target_high"});
    maybe(s, "iterations", "sampler", cfg.sampler.iterations);
    maybe(s, "burn_in", "sampler", cfg.sampler.burn_in);
    maybe(s, "thin", "sampler", cfg.sampler.thin);
    maybe(s, "seed", "sampler", cfg.sampler.seed);
    maybe(s, "adapt_window", "sampler", cfg.sampler.adapt_window);
    maybe(s, "chains", "sampler", cfg.chains);
    maybe(s, "target_low", "sampler", cfg.sampler.target_low);
    maybe(s, "target_high", "sampler", cfg.sampler.target_high);
  }

  if (doc.contains("labeling")) {
    const auto& l = doc.at("labeling");
    check_keys(l, "labeling",
               {"constraints", "prior_draws", "threshold", "normalize_variable",
                "reference_passes", "seed"});
    if (l.contains("constraints")) {
      const auto& cs = l.at("constraints");
      if (!cs.is_array()) throw ConfigError("'labeling.constraints' must be a list");
      for (std::size_t i = 0; i < cs.size(); ++i)
        cfg.labeling.constraints.push_back(parse_constraint(cs[i], i));
    }
    maybe(l, "prior_draws", "labeling", cfg.labeling.prior_draws);
    maybe(l, "threshold", "labeling", cfg.labeling.threshold);
    maybe(l, "normalize_variable", "labeling", cfg.labeling.normalize_variable);
    maybe(l, "reference_passes", "labeling", cfg.labeling.reference_passes);
    maybe(l, "seed", "labeling", cfg.labeling.seed);
  }

  if (doc.contains("analysis")) {
    const auto& a = doc.at("analysis");
    check_keys(a, "analysis", {"horizon", "band_level", "shock_scale", "hd_mode"});
    maybe(a, "horizon", "analysis", cfg.analysis.horizon);
    maybe(a, "band_level", "analysis", cfg.analysis.band_level);
    if (a.contains("shock_scale"))
      cfg.analysis.shock_scale = parse_shock_scale(get<std::string>(a, "shock_scale", "analysis"));
    if (a.contains("hd_mode"))
      cfg.analysis.hd_mode = parse_hd_mode(get<std::string>(a, "hd_mode", "analysis"));
  }

  if (doc.contains("simulate")) {
    const auto& s = doc.at("simulate");
    check_keys(s, "simulate", {"params", "T", "seed", "names", "start", "burn"});
    if (!s.contains("params")) throw ConfigError("'simulate' needs 'params'");
    cfg.simulate.params = params_from_json(s.at("params"));
    cfg.simulate.present = true;
    long T = 400, burn = 200;
    maybe(s, "T", "simulate", T);
    maybe(s, "burn", "simulate", burn);
    if (T < 1 || burn < 0) throw ConfigError("simulate.T must be positive and simulate.burn >= 0");
    cfg.simulate.observations = T;
    cfg.simulate.burn = burn;
    maybe(s, "seed", "simulate", cfg.simulate.seed);
    maybe(s, "names", "simulate", cfg.simulate.names);
    if (s.contains("start")) {
      try {
        cfg.simulate.start = parse_quarter(get<std::string>(s, "start", "simulate"));
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    }
    if (!cfg.simulate.names.empty() &&
        static_cast<Eigen::Index>(cfg.simulate.names.size()) != cfg.simulate.params.variables())
      throw ConfigError("simulate.names must name every variable");
  }

  if (doc.contains("geweke")) {
    const auto& g = doc.at("geweke");
    check_keys(g, "geweke",
               {"marginal_draws", "successive_iterations", "successive_burn_in", "batches",
                "seed", "observations", "lags"});
    maybe(g, "marginal_draws", "geweke", cfg.geweke.marginal_draws);
    maybe(g, "successive_iterations", "geweke", cfg.geweke.successive_iterations);
    maybe(g, "successive_burn_in", "geweke", cfg.geweke.successive_burn_in);
    maybe(g, "batches", "geweke", cfg.geweke.batches);
    maybe(g, "seed", "geweke", cfg.geweke.seed);
    maybe(g, "observations", "geweke", cfg.geweke.observations);
    maybe(g, "lags", "geweke", cfg.geweke.lags);
  }

  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    check_keys(o, "output", {"dir"});
    if (o.contains("dir")) cfg.output_dir = get<std::string>(o, "dir", "output");
  }

  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  return parse_config(doc, path.parent_path());
}

}  // namespace svart
