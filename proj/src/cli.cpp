#include "svart/cli.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "svart/chain_io.hpp"
#include "svart/diagnostics.hpp"
#include "svart/errors.hpp"
#include "svart/simulate.hpp"

namespace svart::cli {

namespace fs = std::filesystem;
using nlohmann::json;

void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.paper_scale) {
    const auto keep_seed = cfg.sampler.seed;
    const auto keep_window = cfg.sampler.adapt_window;
    cfg.sampler = SamplerConfig::paper_scale();
    cfg.sampler.seed = keep_seed;
    cfg.sampler.adapt_window = keep_window;
  }
  if (o.seed) {
    cfg.sampler.seed = *o.seed;
    cfg.simulate.seed = *o.seed;
    cfg.geweke.seed = *o.seed;
    cfg.labeling.seed = *o.seed;
  }
  if (o.chains) cfg.chains = *o.chains;
  if (o.out) cfg.output_dir = *o.out;
  cfg.validate();
}

namespace {

TransformSpec transform_spec(const DataSettings& d) {
  TransformSpec spec;
  for (const auto& t : d.transforms) spec.tags.push_back(parse_transform(t));
  return spec;
}

PriorSet build_prior(const RunConfig& cfg, const Vector& sigma, Eigen::Index N, int lags) {
  MinnesotaConfig m = cfg.prior.minnesota;
  if (cfg.prior.estimate_sigma || m.sigma.size() == 0) m.sigma = sigma;
  if (m.sigma.size() != N) throw ConfigError("prior.sigma must have one entry per variable");
  PriorSet priors = default_priors(m, N, lags);
  priors.b_sd = cfg.prior.b_sd;
  priors.lambda_mean = Vector::Constant(N, cfg.prior.lambda_mean);
  priors.lambda_support = cfg.prior.lambda_support;
  priors.validate();
  return priors;
}

Problem prepare_with_lags(const RunConfig& cfg, std::optional<int> fixed_lags) {
  if (!cfg.data) throw ConfigError("this command needs a 'data' section");
  Problem pr;
  pr.panel = load_panel(cfg.data->path, transform_spec(*cfg.data));
  if (fixed_lags)
    pr.lags = *fixed_lags;
  else
    pr.lags = cfg.lag.use_aic ? select_lag_aic(pr.panel, cfg.lag.max_lags) : cfg.lag.lags;
  pr.layout = build_layout(pr.panel, pr.lags);
  const Vector sigma = cfg.prior.estimate_sigma ? estimate_sigma(pr.panel, pr.lags)
                                                : cfg.prior.minnesota.sigma;
  pr.priors = build_prior(cfg, sigma, pr.panel.values.cols(), pr.lags);
  return pr;
}

fs::path prepare_out(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  return cfg.output_dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cli", "cannot write '" + path.string() + "'");
  out << text;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "undefined";
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

json pair_json(const std::pair<Eigen::Index, Eigen::Index>& p) {
  return json::array({p.first + 1, p.second + 1});
}

}  // namespace

Problem prepare_problem(const RunConfig& cfg) { return prepare_with_lags(cfg, std::nullopt); }

PriorSet labeling_prior(const RunConfig& cfg, Eigen::Index n_vars, int lags) {
  const Vector sigma = cfg.prior.estimate_sigma ? Vector::Ones(n_vars) : cfg.prior.minnesota.sigma;
  return build_prior(cfg, sigma, n_vars, lags);
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cli", "cannot read '" + path.string() + "' for hashing");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const std::vector<fs::path>& files) {
  json m;
  m["command"] = command;
  m["files"] = json::array();
  for (const auto& f : files)
    m["files"].push_back({{"name", f.filename().string()},
                          {"bytes", fs::file_size(f)},
                          {"sha256", sha256_file(f)}});
  write_text(dir / ("manifest_" + command + ".json"), m.dump(2) + "\n");
}

int cmd_fit(const RunConfig& cfg, std::ostream& log) {
  const Problem pr = prepare_problem(cfg);
  log << "fit: " << pr.panel.values.rows() << " observations, " << pr.panel.values.cols()
      << " variables, p = " << pr.lags << (cfg.lag.use_aic ? " (AIC)" : "") << "\n";

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Chain> chains;
  if (cfg.chains == 1)
    chains.push_back(run_gibbs(pr.layout, pr.priors, cfg.sampler));
  else
    chains = run_chains(pr.layout, pr.priors, cfg.sampler, cfg.chains);
  for (auto& c : chains) c.names = pr.panel.names;
  Chain merged = merge_chains(chains);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const fs::path out = prepare_out(cfg);
  json settings = cfg.source;
  settings["effective"] = {{"lags", pr.lags},
                           {"iterations", cfg.sampler.iterations},
                           {"burn_in", cfg.sampler.burn_in},
                           {"thin", cfg.sampler.thin},
                           {"seed", cfg.sampler.seed},
                           {"chains", cfg.chains}};
  const fs::path chain_path = out / "chain.csv";
  write_chain(chain_path, merged, settings);
  const fs::path diag_path = out / "diagnostics.csv";
  write_diagnostics(diag_path.string(), diagnostics(chains));
  write_manifest(out, "fit", {chain_path, meta_path(chain_path), diag_path});

  log << "fit: " << merged.size() << " draws in " << std::fixed << std::setprecision(1) << seconds
      << " s\n";
  for (const auto& w : merged.meta.warnings) log << "warning: " << w << "\n";
  return kExitOk;
}

int cmd_label(const RunConfig& cfg, const fs::path& chain_path, std::ostream& log) {
  const auto& cons = cfg.labeling.constraints;
  if (cons.empty()) throw ConfigError("label needs labeling.constraints (one or two sets)");
  Chain chain = read_chain(chain_path);
  const auto N = chain.variables();
  for (const auto& c : cons)
    if (c.variables() != N)
      throw ConfigError("constraint '" + c.name + "' does not match the chain's " +
                        std::to_string(N) + " variables");
  if (cfg.labeling.normalize_variable >= N) throw ConfigError("labeling.normalize_variable out of range");
  const PriorSet priors = cfg.data ? prepare_with_lags(cfg, chain.lags()).priors
                                   : labeling_prior(cfg, N, chain.lags());

  Chain canon = canonicalize_chain(chain, nullptr, cfg.labeling.reference_passes);
  canon = normalize_chain(canon, cfg.labeling.normalize_variable);
  Rng rng = make_rng(cfg.labeling.seed, 0);
  const auto n_prior = static_cast<std::size_t>(cfg.labeling.prior_draws);

  const fs::path out = prepare_out(cfg);
  std::vector<fs::path> files;
  json summary;
  summary["chain"] = chain_path.string();
  summary["draws"] = canon.size();
  summary["prior_draws"] = n_prior;
  summary["threshold"] = cfg.labeling.threshold;
  summary["constraints"] = json::array();
  for (const auto& c : cons) summary["constraints"].push_back({{"name", c.name}, {"horizons", c.horizons}});

  if (cons.size() == 2) {
    const auto post = pair_posterior_probs(canon, cons[0], cons[1]);
    const auto prior = pair_prior_probs(priors, cons[0], cons[1], n_prior, rng,
                                        cfg.labeling.normalize_variable);
    const auto res = bayes_factors(post.prob, prior.prob, cfg.labeling.threshold);

    std::ostringstream table;
    table << cons[0].name << " \\ " << cons[1].name;
    for (Eigen::Index k = 0; k < N; ++k) table << ",shock" << k + 1;
    table << '\n';
    for (Eigen::Index i = 0; i < N; ++i) {
      table << "shock" << i + 1;
      for (Eigen::Index k = 0; k < N; ++k) table << ',' << (i == k ? "" : fmt(res.bayes_factors(i, k)));
      table << '\n';
    }
    files.push_back(out / "bayes_factors.csv");
    write_text(files.back(), table.str());

    std::ostringstream longt;
    longt << "r1_shock,r2_shock,posterior_count,posterior,prior_count,prior,prior_se,bayes_factor\n";
    for (Eigen::Index i = 0; i < N; ++i)
      for (Eigen::Index k = 0; k < N; ++k) {
        if (i == k) continue;
        longt << i + 1 << ',' << k + 1 << ',' << post.count(i, k) << ',' << fmt(post.prob(i, k)) << ','
              << prior.count(i, k) << ',' << fmt(prior.prob(i, k)) << ','
              << fmt(prior.std_error(i, k)) << ',' << fmt(res.bayes_factors(i, k)) << '\n';
      }
    files.push_back(out / "labeling_pairs.csv");
    write_text(files.back(), longt.str());

    summary["mode"] = "pair";
    summary["decision"] = std::string(to_string(res.decision));
    summary["selected"] = res.selected ? pair_json(*res.selected) : json(nullptr);
    summary["top_two_ratio"] = res.top_two_ratio;
    summary["supported"] = json::array();
    for (const auto& p : res.supported) summary["supported"].push_back(pair_json(p));
    summary["undefined"] = json::array();
    for (const auto& p : res.undefined) summary["undefined"].push_back(pair_json(p));

    log << "label: decision " << to_string(res.decision);
    if (res.selected)
      log << " (" << cons[0].name << " = shock" << res.selected->first + 1 << ", " << cons[1].name
          << " = shock" << res.selected->second + 1 << ")";
    log << "\n";
    if (!res.undefined.empty())
      log << "label: " << res.undefined.size() << " pair(s) with zero prior estimate, Bayes factor undefined\n";
  } else {
    const Vector post = single_posterior_probs(canon, cons[0]);
    const Vector prior =
        single_prior_probs(priors, cons[0], n_prior, rng, cfg.labeling.normalize_variable);
    std::ostringstream t;
    t << "shock,posterior,prior,bayes_factor\n";
    Eigen::Index best = -1;
    double best_bf = 0.0;
    std::vector<double> supported_post;
    for (Eigen::Index i = 0; i < N; ++i) {
      const double bf = prior(i) > 0.0 ? post(i) / prior(i) : std::nan("");
      t << i + 1 << ',' << fmt(post(i)) << ',' << fmt(prior(i)) << ',' << fmt(bf) << '\n';
      if (bf > cfg.labeling.threshold) {
        supported_post.push_back(post(i));
        if (bf > best_bf) {
          best_bf = bf;
          best = i;
        }
      }
    }
    files.push_back(out / "labeling_single.csv");
    write_text(files.back(), t.str());
    std::string decision = "unsupported";
    if (supported_post.size() == 1) {
      decision = "selected";
    } else if (supported_post.size() > 1) {
      std::sort(supported_post.rbegin(), supported_post.rend());
      decision = supported_post[0] / supported_post[1] > cfg.labeling.threshold ? "selected" : "ambiguous";
    }
    summary["mode"] = "single";
    summary["decision"] = decision;
    summary["selected"] = decision == "selected" ? json(best + 1) : json(nullptr);
    log << "label: decision " << decision << "\n";
  }

  files.push_back(out / "canonical_chain.csv");
  write_chain(files.back(), canon, cfg.source);
  files.push_back(meta_path(files.back()));
  files.push_back(out / "labeling.json");
  write_text(files.back(), summary.dump(2) + "\n");
  write_manifest(out, "label", files);
  return kExitOk;
}

int cmd_analyze(const RunConfig& cfg, const fs::path& chain_path, std::ostream& log) {
  const Chain chain = read_chain(chain_path);
  const auto& a = cfg.analysis;
  const auto ir = irf(chain, a.horizon, a.shock_scale, a.band_level);
  const auto fe = fevd(chain, a.horizon, a.band_level);
  std::optional<HdResult> hd;
  if (cfg.data) {
    const Problem pr = prepare_with_lags(cfg, chain.lags());
    if (pr.layout.variables() != chain.variables())
      throw ConfigError("data and chain have different numbers of variables");
    hd = historical_decomposition(chain, pr.layout, a.hd_mode);
  }

  const fs::path out = prepare_out(cfg);
  std::vector<fs::path> files;
  auto emit = [&](const std::string& name, auto&& writer) {
    files.push_back(out / name);
    std::ofstream f(files.back(), std::ios::binary);
    if (!f) throw Error("cli", "cannot write '" + files.back().string() + "'");
    writer(f);
  };
  emit("irf.csv", [&](std::ostream& f) { write_irf_table(f, ir, chain.names); });
  emit("fevd.csv", [&](std::ostream& f) { write_fevd_table(f, fe, chain.names); });
  if (hd) emit("hd.csv", [&](std::ostream& f) { write_hd_table(f, *hd, chain.names); });
  write_manifest(out, "analyze", files);

  log << "analyze: " << ir.used_draws << " stable draws used, " << ir.excluded_unstable
      << " unstable excluded\n";
  if (!hd) log << "analyze: no data section, historical decomposition skipped\n";
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  const auto& s = cfg.simulate;
  if (!s.present) throw ConfigError("simulate needs a 'simulate' section");
  if (!is_stable(s.params)) throw Error("cli", "refusing to simulate from unstable parameters");
  Rng rng = make_rng(s.seed, 0);
  Matrix shocks;
  TimeSeriesPanel panel = simulate_panel(s.params, s.observations, rng, s.start, s.burn, &shocks);
  if (!s.names.empty()) panel.names = s.names;

  const fs::path out = prepare_out(cfg);
  std::vector<fs::path> files{out / "panel.csv", out / "truth.json", out / "shocks.csv"};
  write_panel(files[0], panel);
  json truth;
  truth["params"] = params_to_json(s.params);
  truth["T"] = s.observations;
  truth["seed"] = s.seed;
  truth["burn"] = s.burn;
  truth["start"] = s.start.str();
  truth["names"] = panel.names;
  truth["transforms"] = std::vector<std::string>(panel.names.size(), "level");
  write_text(files[1], truth.dump(2) + "\n");
  TimeSeriesPanel shock_panel{panel.dates, {}, shocks};
  for (Eigen::Index i = 0; i < shocks.cols(); ++i) shock_panel.names.push_back("eps" + std::to_string(i + 1));
  write_panel(files[2], shock_panel);
  write_manifest(out, "simulate", files);
  log << "simulate: " << panel.values.rows() << " periods written to " << files[0].string() << "\n";
  return kExitOk;
}

int cmd_geweke(const RunConfig& cfg, std::ostream& log) {
  const auto& g = cfg.geweke;
  const PriorSet priors = geweke_test_prior(g.variables, g.lags);
  const auto report = geweke_joint_test(g, priors, cfg.sampler);
  if (!report.ok()) throw Error("sampler", report.error);
  const fs::path out = prepare_out(cfg);
  std::ostringstream t;
  t << "statistic,marginal_mean,successive_mean,z\n";
  for (std::size_t j = 0; j < report.z.size(); ++j)
    t << report.statistics[j] << ',' << fmt(report.marginal_mean[j]) << ','
      << fmt(report.successive_mean[j]) << ',' << fmt(report.z[j]) << '\n';
  const fs::path path = out / "geweke.csv";
  write_text(path, t.str());
  write_manifest(out, "geweke", {path});
  const double within = report.fraction_within(3.0);
  const bool pass = within >= 0.95;
  log << "geweke: " << std::fixed << std::setprecision(1) << 100.0 * within
      << "% of z-scores within |z| < 3, max |z| = " << std::setprecision(2) << report.max_abs_z()
      << (pass ? " (pass)" : " (FAIL)") << "\n";
  return pass ? kExitOk : kExitCompute;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian structural VAR with Student-t shocks"};
  app.require_subcommand(1);

  fs::path config_path;
  fs::path chain_path;
  Overrides ov;
  std::uint64_t seed = 0;
  int chains = 0;
  std::string out_dir;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--seed", seed, "Random seed (overrides the file)");
    sub->add_option("--chains", chains, "Number of independent chains");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_flag("--paper-scale", ov.paper_scale, "1.1M sweeps, 100k burn-in, no thinning");
  };
  auto* fit = app.add_subcommand("fit", "Estimate the model and write the posterior chain");
  auto* label = app.add_subcommand("label", "Canonicalize draws and compute Bayes factors");
  auto* analyze = app.add_subcommand("analyze", "Impulse responses, FEVD, historical decomposition");
  auto* simulate = app.add_subcommand("simulate", "Write a synthetic panel from known parameters");
  auto* geweke = app.add_subcommand("geweke", "Joint-distribution test of the sampler");
  for (auto* sub : {fit, label, analyze, simulate, geweke}) common(sub);
  for (auto* sub : {label, analyze})
    sub->add_option("--chain", chain_path, "Chain file (default <out>/chain.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::ostringstream msg, help;
    app.exit(e, help, msg);
    err << msg.str() << help.str();
    return kExitConfig;
  }

  auto count = [](CLI::App* sub, const char* name) { return sub->count(name) > 0; };
  CLI::App* active = app.get_subcommands().front();
  if (count(active, "--seed")) ov.seed = seed;
  if (count(active, "--chains")) ov.chains = chains;
  if (count(active, "--out")) ov.out = out_dir;

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
    apply_overrides(cfg, ov);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const std::string name = active->get_name();
    if (chain_path.empty()) chain_path = cfg.output_dir / "chain.csv";
    if (name == "fit") return cmd_fit(cfg, out);
    if (name == "label") return cmd_label(cfg, chain_path, out);
    if (name == "analyze") return cmd_analyze(cfg, chain_path, out);
    if (name == "simulate") return cmd_simulate(cfg, out);
    return cmd_geweke(cfg, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitCompute;
  }
}

}  // namespace svart::cli
