// cylk: columnar-structure analysis of spatial point patterns.
//
// Subcommands cover simulation of Poisson line cluster point processes,
// cylindrical K summaries and directional scans, F/G/J model checks, global
// rank envelope tests, moment-based Thomas fits, Bayesian line inference,
// and posterior line rasters. Every stochastic command requires --seed and
// writes a run manifest next to its outputs.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cylk/bayes.hpp"
#include "cylk/envelope.hpp"
#include "cylk/fit.hpp"
#include "cylk/geometry.hpp"
#include "cylk/numeric.hpp"
#include "cylk/pattern.hpp"
#include "cylk/plcpp.hpp"
#include "cylk/rng.hpp"
#include "cylk/summaries.hpp"
#include "cylk/vmf.hpp"

using nlohmann::json;
using namespace cylk;

namespace {

constexpr const char* kVersion = "0.1.0";

std::vector<double> parse_grid(const std::string& spec) {
  // "lo:hi:n" inclusive linear grid
  double lo = 0, hi = 0;
  int n = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3 || n < 1 || !(hi > lo))
    throw ConfigError("bad grid spec '" + spec + "', expected lo:hi:n");
  std::vector<double> g;
  for (int i = 0; i < n; ++i)
    g.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
  return g;
}

Vec parse_vec(const std::string& spec) {
  std::vector<double> vals;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
  if (vals.size() == 2) return Vec(vals[0], vals[1]);
  if (vals.size() == 3) return Vec(vals[0], vals[1], vals[2]);
  throw ConfigError("bad vector spec '" + spec + "'");
}

BoxWindow window_from_json(const json& j) {
  const auto& lower = j.at("lower");
  const auto& upper = j.at("upper");
  if (lower.size() != upper.size() || (lower.size() != 2 && lower.size() != 3))
    throw ConfigError("window: lower/upper must both have 2 or 3 entries");
  const int d = static_cast<int>(lower.size());
  Vec lo = Vec::zero(d), hi = Vec::zero(d);
  for (int i = 0; i < d; ++i) {
    lo[i] = lower.at(static_cast<std::size_t>(i)).get<double>();
    hi[i] = upper.at(static_cast<std::size_t>(i)).get<double>();
  }
  return BoxWindow(lo, hi);
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + std::string(e.what()));
  }
  return j;
}

std::string digest(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) h = mix64(h ^ c);
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Manifest {
  std::string command;
  std::string config_digest;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> inputs, outputs;
  int threads = 1;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  void write() const {
    if (outputs.empty()) return;
    json j;
    j["command"] = command;
    j["config_digest"] = config_digest;
    if (seed) j["seed"] = *seed;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["version"] = kVersion;
    j["threads"] = threads;
    j["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::ofstream out(outputs.front() + ".manifest.json");
    out << j.dump(2) << "\n";
  }
};

PointPattern load_pattern(const std::string& path, const std::string& window_path) {
  if (!window_path.empty()) return read_pattern_csv(path, read_window_json(window_path));
  return read_pattern_csv(path);
}

// ---- subcommand implementations ----

int cmd_simulate(const std::string& config_path, std::uint64_t seed,
                 const std::string& out, const std::string& latent_out, Manifest& man) {
  const json cfg = load_json(config_path);
  man.config_digest = digest(cfg.dump());
  man.inputs = {config_path};

  const BoxWindow w = window_from_json(cfg.at("window"));
  const int d = w.dim();
  UnitVector mu = UnitVector::axis(d, d - 1);
  if (cfg.contains("mu")) {
    Vec m = Vec::zero(d);
    for (int i = 0; i < d; ++i) m[i] = cfg["mu"].at(static_cast<std::size_t>(i)).get<double>();
    mu = UnitVector::normalized(m);
  } else if (cfg.contains("theta_deg")) {
    if (d != 2) throw ConfigError("theta_deg only applies to planar simulations");
    mu = UnitVector::from_angle(cfg["theta_deg"].get<double>() * kPi / 180.0);
  }
  const PlcppParams params(cfg.at("rho_L").get<double>(), mu,
                           cfg.value("kappa", 0.0), cfg.at("alpha").get<double>(),
                           cfg.at("sigma2").get<double>(),
                           cfg.value("degenerate", false));
  const BoxWindow w_ext = cfg.contains("window_ext")
                              ? window_from_json(cfg["window_ext"])
                              : default_extended_window(params, w);
  const LineProposal prop = cfg.value("proposal", std::string("exact")) == "sine"
                                ? LineProposal::SineOnly
                                : LineProposal::Exact;
  RngStream rng(seed, 0);
  const bool keep = !latent_out.empty();
  const LatentRealization lat = simulate(params, w, w_ext, rng, keep, prop);
  write_pattern_csv(lat.pattern, out);
  man.outputs.push_back(out);
  if (keep) {
    write_latent_json(lat, latent_out);
    man.outputs.push_back(latent_out);
  }
  return 0;
}

int cmd_kfun(const std::string& pattern, const std::string& window_path,
             const std::string& u_spec, double t, const std::string& grid_spec,
             const std::string& correction, const std::string& out, Manifest& man) {
  man.inputs = {pattern};
  man.config_digest = digest(u_spec + "|" + grid_spec + "|" + correction);
  const PointPattern p = load_pattern(pattern, window_path);
  const UnitVector u = UnitVector::normalized(parse_vec(u_spec));
  const CorrectionKind corr = correction == "combined" ? CorrectionKind::Combined
                                                       : CorrectionKind::Translation;
  const SummaryCurve k = cylindrical_k(p, u, parse_grid(grid_spec), t, corr);
  write_curve_csv(k, out);
  man.outputs.push_back(out);
  return 0;
}

int cmd_scan(const std::string& pattern, const std::string& window_path, double r,
             double t, int nphi, const std::string& out, Manifest& man) {
  man.inputs = {pattern};
  man.config_digest = digest(std::to_string(r) + "|" + std::to_string(t));
  const PointPattern p = load_pattern(pattern, window_path);
  if (nphi < 2) throw ConfigError("scan: need at least 2 angles");
  std::vector<double> phis;
  for (int i = 0; i < nphi; ++i) phis.push_back((i + 0.5) * kPi / nphi);
  const SummaryCurve s = directional_scan(p, phis, r, t);
  write_curve_csv(s, out);
  man.outputs.push_back(out);
  return 0;
}

int cmd_fgj(const std::string& pattern, const std::string& window_path,
            const std::string& grid_spec, int anchors, const std::string& prefix,
            Manifest& man) {
  man.inputs = {pattern};
  man.config_digest = digest(grid_spec);
  const PointPattern p = load_pattern(pattern, window_path);
  const FgjResult fgj = fgj_estimates(p, parse_grid(grid_spec), anchors);
  for (const auto& [curve, name] :
       {std::pair{&fgj.F, "_F.csv"}, {&fgj.G, "_G.csv"}, {&fgj.J, "_J.csv"}}) {
    write_curve_csv(*curve, prefix + name);
    man.outputs.push_back(prefix + name);
  }
  return 0;
}

int cmd_envelope(const std::string& pattern, const std::string& window_path,
                 const std::string& stat_name, const std::string& u_spec, double t,
                 const std::string& grid_spec, int sims, double level,
                 std::uint64_t seed, const std::string& prefix, Manifest& man) {
  man.inputs = {pattern};
  man.config_digest = digest(stat_name + "|" + u_spec + "|" + grid_spec + "|" +
                             std::to_string(sims) + "|" + std::to_string(level));
  const PointPattern p = load_pattern(pattern, window_path);
  CurveStatistic stat;
  stat.grid = parse_grid(grid_spec);
  if (stat_name == "kfun") {
    stat.kind = CurveStatistic::Kind::CylindricalK;
    stat.direction = UnitVector::normalized(parse_vec(u_spec)).vec();
    stat.t = t;
  } else if (stat_name == "ripley") {
    stat.kind = CurveStatistic::Kind::RipleyK;
  } else if (stat_name == "f") {
    stat.kind = CurveStatistic::Kind::Ffun;
  } else if (stat_name == "g") {
    stat.kind = CurveStatistic::Kind::Gfun;
  } else if (stat_name == "j") {
    stat.kind = CurveStatistic::Kind::Jfun;
  } else {
    throw ConfigError("unknown statistic '" + stat_name + "'");
  }
  RngStream rng(seed, 0);
  const EnvelopeResult env = csr_envelope(p, stat, sims, level, rng);
  write_envelope_csv(env, prefix + "_envelope.csv");
  json j;
  j["p_lower"] = env.p_lower;
  j["p_upper"] = env.p_upper;
  j["data_rank"] = env.data_rank;
  j["exits"] = curve_exits(env);
  j["simulations"] = sims;
  j["level"] = level;
  std::ofstream out(prefix + "_summary.json");
  out << j.dump(2) << "\n";
  man.outputs = {prefix + "_envelope.csv", prefix + "_summary.json"};
  return 0;
}

int cmd_fit(const std::string& pattern, const std::string& window_path,
            double i_length, double rmin, double rmax, double q, double pw, int ngrid,
            int restarts, std::uint64_t seed, const std::string& out, Manifest& man) {
  man.inputs = {pattern};
  man.config_digest = digest(std::to_string(i_length) + "|" + std::to_string(rmin) +
                             "|" + std::to_string(rmax));
  const PointPattern p = load_pattern(pattern, window_path);
  ContrastConfig cfg;
  cfg.r_min = rmin;
  cfg.r_max = rmax;
  cfg.q = q;
  cfg.p = pw;
  cfg.n_grid = ngrid;
  cfg.restarts = restarts;
  cfg.seed = seed;
  const ThomasFit fit = min_contrast_fit(p, i_length, cfg);
  write_fit_json(fit, out);
  man.outputs.push_back(out);
  return 0;
}

BayesConfig bayes_config_from_json(const json& cfg) {
  BayesConfig bc;
  bc.alpha_shape = cfg.value("alpha_shape", bc.alpha_shape);
  bc.alpha_rate = cfg.value("alpha_rate", bc.alpha_rate);
  bc.rho_L_shape = cfg.value("rho_L_shape", bc.rho_L_shape);
  bc.rho_L_rate = cfg.value("rho_L_rate", bc.rho_L_rate);
  bc.kappa_fixed = cfg.value("kappa_fixed", bc.kappa_fixed);
  bc.kappa = cfg.value("kappa", bc.kappa);
  bc.kappa_max = cfg.value("kappa_max", bc.kappa_max);
  bc.sigma2_max = cfg.value("sigma2_max", bc.sigma2_max);
  bc.proposal_kappa0 = cfg.value("proposal_kappa0", bc.proposal_kappa0);
  bc.proposal_sd_kappa = cfg.value("proposal_sd_kappa", bc.proposal_sd_kappa);
  bc.proposal_sd_sigma2 = cfg.value("proposal_sd_sigma2", bc.proposal_sd_sigma2);
  bc.mc_samples = cfg.value("mc_samples", bc.mc_samples);
  if (cfg.value("integral_mode", std::string("mc")) == "quadrature")
    bc.integral_mode = IntegralMode::Quadrature;
  bc.iterations = cfg.value("iterations", bc.iterations);
  bc.burn_in = cfg.value("burn_in", bc.burn_in);
  bc.thin = cfg.value("thin", bc.thin);
  bc.bdm_attempts = cfg.value("bdm_attempts", bc.bdm_attempts);
  bc.store_line_samples = cfg.value("store_line_samples", bc.store_line_samples);
  bc.init_rho_L = cfg.value("init_rho_L", 0.0);
  bc.init_alpha = cfg.value("init_alpha", 0.0);
  bc.init_sigma2 = cfg.value("init_sigma2", 0.0);
  if (cfg.contains("init_theta_deg"))
    bc.init_mu = UnitVector::from_angle(cfg["init_theta_deg"].get<double>() * kPi / 180.0).vec();
  return bc;
}

int cmd_bayes(const std::string& pattern, const std::string& window_path,
              const std::string& config_path, std::uint64_t seed,
              const std::string& out, const std::string& lines_out, Manifest& man) {
  const json cfg = load_json(config_path);
  man.inputs = {pattern, config_path};
  man.config_digest = digest(cfg.dump());
  const PointPattern p = load_pattern(pattern, window_path);
  BayesConfig bc = bayes_config_from_json(cfg);
  bc.seed = seed;
  if (!lines_out.empty() && bc.store_line_samples == 0) bc.store_line_samples = 100;
  const BoxWindow w_ext = cfg.contains("window_ext")
                              ? window_from_json(cfg["window_ext"])
                              : p.window.inflated(cfg.value("ext_margin", 0.05));
  const McmcTrace trace = run_chain(p, bc, w_ext);
  write_trace_csv(trace, out);
  man.outputs.push_back(out);
  if (!lines_out.empty()) {
    write_line_samples_json(trace.line_samples, p.window, lines_out);
    man.outputs.push_back(lines_out);
  }
  // acceptance-rate report on stdout, one line per move type
  auto rate = [](long long acc, long long prop) {
    return prop > 0 ? static_cast<double>(acc) / static_cast<double>(prop) : 0.0;
  };
  std::printf("acceptance mu %.3f sigma2 %.3f birth %.3f death %.3f move %.3f\n",
              rate(trace.acc_mu, trace.prop_mu),
              rate(trace.acc_sigma2, trace.prop_sigma2),
              rate(trace.acc_birth, trace.prop_birth),
              rate(trace.acc_death, trace.prop_death),
              rate(trace.acc_move, trace.prop_move));
  return 0;
}

int cmd_raster(const std::string& lines_path, int nx, int ny,
               const std::string& format, const std::string& out, Manifest& man) {
  man.inputs = {lines_path};
  man.config_digest = digest(std::to_string(nx) + "x" + std::to_string(ny));
  const auto [samples, w] = read_line_samples_json(lines_path);
  const std::vector<double> grid = line_density_raster(samples, w, nx, ny);
  if (format == "pgm")
    write_raster_pgm(grid, nx, ny, out);
  else
    write_raster_csv(grid, nx, ny, out);
  man.outputs.push_back(out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cylk: cylindrical K summaries and Poisson line cluster inference"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "cap internal parallelism (output-invariant)");

  // shared option storage
  std::string config_path, pattern, window_path, out, latent_out, lines_out;
  std::string u_spec = "0,0,1", grid_spec = "0.01:0.2:20", correction = "translation";
  std::string stat_name = "kfun", format = "csv";
  double t = 0.25, r = 0.1, level = 0.95, i_length = 1.0;
  double rmin = 0, rmax = 0, q = 0.25, pw = 2.0;
  int nphi = 90, anchors = 10000, sims = 999, ngrid = 64, restarts = 5, nx = 100,
      ny = 100;
  std::uint64_t seed = 0;

  CLI::App* sim = app.add_subcommand("simulate", "simulate a Poisson line cluster point process");
  sim->add_option("--config", config_path, "model + window JSON")->required();
  sim->add_option("--seed", seed, "RNG seed")->required();
  sim->add_option("--out", out, "pattern CSV path")->required();
  sim->add_option("--latent", latent_out, "also write the latent lines/parents JSON");

  CLI::App* kfun = app.add_subcommand("kfun", "cylindrical K-function over an r grid");
  kfun->add_option("--pattern", pattern)->required();
  kfun->add_option("--window", window_path, "window JSON overriding the CSV comment");
  kfun->add_option("--u", u_spec, "cylinder direction, comma separated");
  kfun->add_option("--t", t, "cylinder half-height");
  kfun->add_option("--rgrid", grid_spec, "lo:hi:n radius grid");
  kfun->add_option("--correction", correction)->check(CLI::IsMember({"translation", "combined"}));
  kfun->add_option("--out", out)->required();

  CLI::App* scan = app.add_subcommand("scan", "directional K scan over angles");
  scan->add_option("--pattern", pattern)->required();
  scan->add_option("--window", window_path);
  scan->add_option("--r", r, "cylinder radius");
  scan->add_option("--t", t, "cylinder half-height");
  scan->add_option("--nphi", nphi, "number of angles on [0, pi)");
  scan->add_option("--out", out)->required();

  CLI::App* fgj = app.add_subcommand("fgj", "F, G and J estimates");
  fgj->add_option("--pattern", pattern)->required();
  fgj->add_option("--window", window_path);
  fgj->add_option("--rgrid", grid_spec)->required();
  fgj->add_option("--anchors", anchors, "minimum F anchor count");
  fgj->add_option("--out", out, "output prefix")->required();

  CLI::App* env = app.add_subcommand("envelope", "global rank envelope against CSR");
  env->add_option("--pattern", pattern)->required();
  env->add_option("--window", window_path);
  env->add_option("--stat", stat_name)->check(CLI::IsMember({"kfun", "ripley", "f", "g", "j"}));
  env->add_option("--u", u_spec);
  env->add_option("--t", t);
  env->add_option("--rgrid", grid_spec)->required();
  env->add_option("--sims", sims, "number of CSR simulations");
  env->add_option("--level", level, "envelope level");
  env->add_option("--seed", seed)->required();
  env->add_option("--out", out, "output prefix")->required();

  CLI::App* fit = app.add_subcommand("fit-thomas", "minimum-contrast Thomas fit of a projected pattern");
  fit->add_option("--pattern", pattern, "planar pattern CSV")->required();
  fit->add_option("--window", window_path);
  fit->add_option("--ilength", i_length, "length of the projected interval I")->required();
  fit->add_option("--rmin", rmin);
  fit->add_option("--rmax", rmax);
  fit->add_option("--q", q, "contrast exponent");
  fit->add_option("--p", pw, "contrast power");
  fit->add_option("--ngrid", ngrid);
  fit->add_option("--restarts", restarts);
  fit->add_option("--seed", seed, "restart seed");
  fit->add_option("--out", out)->required();

  CLI::App* bay = app.add_subcommand("bayes", "Bayesian MCMC for the latent line process");
  bay->add_option("--pattern", pattern)->required();
  bay->add_option("--window", window_path);
  bay->add_option("--config", config_path, "priors/tunings JSON")->required();
  bay->add_option("--seed", seed)->required();
  bay->add_option("--out", out, "trace CSV")->required();
  bay->add_option("--lines-out", lines_out, "posterior line samples JSON");

  CLI::App* ras = app.add_subcommand("raster", "line-density raster from posterior samples");
  ras->add_option("--lines", lines_out, "line samples JSON")->required();
  ras->add_option("--nx", nx);
  ras->add_option("--ny", ny);
  ras->add_option("--format", format)->check(CLI::IsMember({"csv", "pgm"}));
  ras->add_option("--out", out)->required();

  CLI11_PARSE(app, argc, argv);

  Manifest man;
  man.threads = threads;
  try {
    int rc = 1;
    if (sim->parsed()) {
      man.command = "simulate";
      man.seed = seed;
      rc = cmd_simulate(config_path, seed, out, latent_out, man);
    } else if (kfun->parsed()) {
      man.command = "kfun";
      rc = cmd_kfun(pattern, window_path, u_spec, t, grid_spec, correction, out, man);
    } else if (scan->parsed()) {
      man.command = "scan";
      rc = cmd_scan(pattern, window_path, r, t, nphi, out, man);
    } else if (fgj->parsed()) {
      man.command = "fgj";
      rc = cmd_fgj(pattern, window_path, grid_spec, anchors, out, man);
    } else if (env->parsed()) {
      man.command = "envelope";
      man.seed = seed;
      rc = cmd_envelope(pattern, window_path, stat_name, u_spec, t, grid_spec, sims,
                        level, seed, out, man);
    } else if (fit->parsed()) {
      man.command = "fit-thomas";
      rc = cmd_fit(pattern, window_path, i_length, rmin, rmax, q, pw, ngrid, restarts,
                   seed, out, man);
    } else if (bay->parsed()) {
      man.command = "bayes";
      man.seed = seed;
      rc = cmd_bayes(pattern, window_path, config_path, seed, out, lines_out, man);
    } else if (ras->parsed()) {
      man.command = "raster";
      rc = cmd_raster(lines_out, nx, ny, format, out, man);
    }
    man.write();
    return rc;
  } catch (const ConfigError& e) {
    std::cerr << json{{"code", 2}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << json{{"code", 2}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << json{{"code", 2}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << json{{"code", 3}, {"message", e.what()}}.dump() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << json{{"code", 4}, {"message", e.what()}}.dump() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << json{{"code", 4}, {"message", e.what()}}.dump() << "\n";
    return 4;
  }
}
