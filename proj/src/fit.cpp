#include "cylk/fit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "cylk/numeric.hpp"
#include "cylk/rng.hpp"

namespace cylk {

std::pair<PointPattern, std::pair<double, double>> project_pattern(
    const PointPattern& p, int axis) {
  if (p.dim != 3) throw DataError("project_pattern: requires a 3D pattern");
  if (axis < 0 || axis > 2) throw std::invalid_argument("project_pattern: bad axis");
  const int a0 = axis == 0 ? 1 : 0;
  const int a1 = axis == 2 ? 1 : 2;
  std::vector<Vec> pts;
  pts.reserve(p.size());
  for (const Vec& x : p.points) pts.emplace_back(x[a0], x[a1]);
  const BoxWindow win(Vec(p.window.lower[a0], p.window.lower[a1]),
                      Vec(p.window.upper[a0], p.window.upper[a1]));
  return {PointPattern(std::move(pts), win),
          {p.window.lower[axis], p.window.upper[axis]}};
}

double thomas_k_theoretical(double rho_L, double sigma2, double r) {
  if (!(rho_L > 0) || !(sigma2 > 0))
    throw std::invalid_argument("thomas_k_theoretical: parameters must be > 0");
  if (r < 0) throw std::invalid_argument("thomas_k_theoretical: r must be >= 0");
  return kPi * r * r + (1.0 - std::exp(-r * r / (4.0 * sigma2))) / rho_L;
}

namespace {

std::vector<double> contrast_grid(double r_min, double r_max, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    g[static_cast<std::size_t>(i)] = r_min + (r_max - r_min) * (i + 0.5) / n;
  return g;
}

double contrast_value(const std::vector<double>& grid, const std::vector<double>& k_hat,
                      double rho_L, double sigma2, double q, double p) {
  // midpoint rule over the grid
  double acc = 0.0;
  const double h = grid.size() > 1 ? grid[1] - grid[0] : 1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double kt = thomas_k_theoretical(rho_L, sigma2, grid[i]);
    const double d = std::pow(std::max(k_hat[i], 0.0), q) - std::pow(kt, q);
    acc += std::pow(std::abs(d), p) * h;
  }
  return acc;
}

}  // namespace

ThomasFit min_contrast_fit_curve(const SummaryCurve& k_hat, double n_points,
                                 double window_area, double i_length,
                                 const ContrastConfig& config) {
  const std::vector<double>& grid = k_hat.args;
  if (grid.size() < 4) throw DataError("min_contrast_fit: contrast grid too short");

  auto objective = [&](const std::vector<double>& x) {
    const double rho_L = std::exp(x[0]);
    const double sigma2 = std::exp(x[1]);
    if (!std::isfinite(rho_L) || !std::isfinite(sigma2)) return 1e100;
    return contrast_value(grid, k_hat.values, rho_L, sigma2, config.q, config.p);
  };

  // heuristic centre: rho_L from the K excess at r_max, sigma2 from scale
  const double r_hi = grid.back();
  const double excess =
      std::max(k_hat.values.back() - kPi * r_hi * r_hi, window_area / n_points * 0.1);
  const double rho0 = 1.0 / excess;
  const double sig0 = std::pow(0.1 * r_hi, 2);

  RngStream rng(config.seed, 0x7F17);
  SimplexResult best;
  best.value = std::numeric_limits<double>::infinity();
  int evals = 0;
  for (int s = 0; s < std::max(1, config.restarts); ++s) {
    std::vector<double> x0 = {std::log(rho0), std::log(sig0)};
    if (s > 0) {
      x0[0] += rng.normal(0.0, 1.5);
      x0[1] += rng.normal(0.0, 1.5);
    }
    SimplexResult r = nelder_mead(objective, x0, 0.5, 1e-8, 4000);
    evals += r.evaluations;
    const bool better =
        r.value < best.value ||
        (r.value == best.value && !best.x.empty() && r.x < best.x);
    if (better) best = r;
  }
  if (best.x.empty() || !std::isfinite(best.value))
    throw NumericError("min_contrast_fit: optimizer failed to produce a finite contrast");

  ThomasFit fit;
  fit.rho_L_hat = std::exp(best.x[0]);
  fit.sigma2_hat = std::exp(best.x[1]);
  const double rho_i = n_points / window_area;
  fit.alpha_hat = rho_i / (fit.rho_L_hat * i_length);
  fit.contrast_value = best.value;
  fit.r_min = grid.front();
  fit.r_max = grid.back();
  fit.q = config.q;
  fit.p = config.p;
  fit.converged = best.converged;
  fit.evaluations = evals;
  if (!fit.converged)
    throw NumericError("min_contrast_fit: simplex did not converge; best contrast " +
                       std::to_string(fit.contrast_value));
  return fit;
}

ThomasFit min_contrast_fit(const PointPattern& p2d, double i_length,
                           const ContrastConfig& config) {
  if (p2d.dim != 2) throw DataError("min_contrast_fit: requires a planar pattern");
  if (static_cast<int>(p2d.size()) < config.min_points)
    throw DataError("min_contrast_fit: need at least " +
                    std::to_string(config.min_points) + " points");
  const double L = p2d.window.min_side();
  const double r_min = config.r_min > 0 ? config.r_min : 0.01 * L;
  const double r_max = config.r_max > 0 ? config.r_max : 0.25 * L;
  if (!(r_max > r_min)) throw ConfigError("min_contrast_fit: r_max must exceed r_min");
  const SummaryCurve k_hat = ripley_k(p2d, contrast_grid(r_min, r_max, config.n_grid));
  return min_contrast_fit_curve(k_hat, static_cast<double>(p2d.size()),
                                p2d.window.volume(), i_length, config);
}

UniformityResult uniformity_check(const std::vector<double>& coords, double lo,
                                  double hi) {
  if (coords.empty()) throw DataError("uniformity_check: empty sample");
  if (!(hi > lo)) throw std::invalid_argument("uniformity_check: bad interval");
  auto cdf = [&](double x) { return std::clamp((x - lo) / (hi - lo), 0.0, 1.0); };
  const KsResult ks = ks_test(coords, cdf);
  UniformityResult out;
  out.statistic = ks.statistic;
  out.p_value = ks.p_value;
  std::vector<double> sorted = coords;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    out.ecdf_args.push_back(sorted[i]);
    out.ecdf_values.push_back(static_cast<double>(i + 1) /
                              static_cast<double>(sorted.size()));
  }
  return out;
}

void write_fit_json(const ThomasFit& fit, const std::string& path) {
  nlohmann::json j;
  j["rho_L_hat"] = fit.rho_L_hat;
  j["sigma2_hat"] = fit.sigma2_hat;
  j["alpha_hat"] = fit.alpha_hat;
  j["contrast"] = {{"value", fit.contrast_value}, {"r_min", fit.r_min},
                   {"r_max", fit.r_max},          {"q", fit.q},
                   {"p", fit.p}};
  j["converged"] = fit.converged;
  j["evaluations"] = fit.evaluations;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write fit file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace cylk
