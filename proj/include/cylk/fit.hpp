#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cylk/pattern.hpp"
#include "cylk/summaries.hpp"

namespace cylk {

struct ContrastConfig {
  double r_min = 0.0;   // 0 = default 0.01 * shorter window side
  double r_max = 0.0;   // 0 = default 0.25 * shorter window side
  double q = 0.25;      // contrast exponent on K
  double p = 2.0;       // contrast power on the difference
  int n_grid = 64;      // quadrature grid for the contrast integral
  int restarts = 5;     // random restarts in log-parameter space
  std::uint64_t seed = 1;
  int min_points = 10;
};

struct ThomasFit {
  double rho_L_hat = 0.0;
  double sigma2_hat = 0.0;
  double alpha_hat = 0.0;
  double contrast_value = 0.0;
  double r_min = 0.0, r_max = 0.0;
  double q = 0.25, p = 2.0;
  bool converged = false;
  int evaluations = 0;
};

// Drops coordinate `axis` (0-based) of a 3D pattern; returns the planar
// pattern and the dropped-axis interval.
std::pair<PointPattern, std::pair<double, double>> project_pattern(
    const PointPattern& p, int axis);

// K-function of the planar modified Thomas process:
// K(r) = pi r^2 + (1 - exp(-r^2 / (4 sigma2))) / rho_L.
double thomas_k_theoretical(double rho_L, double sigma2, double r);

// Minimum-contrast fit of (rho_L, sigma2) against the translation-corrected
// isotropic K, plus alpha_hat = (n/|D|) / (rho_L_hat * i_length).
ThomasFit min_contrast_fit(const PointPattern& p2d, double i_length,
                           const ContrastConfig& config = {});

// Variant fitting a caller-supplied empirical K curve (testing hook).
ThomasFit min_contrast_fit_curve(const SummaryCurve& k_hat, double n_points,
                                 double window_area, double i_length,
                                 const ContrastConfig& config);

struct UniformityResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::vector<double> ecdf_args, ecdf_values;
};

// One-sample Kolmogorov-Smirnov check against Uniform(lo, hi).
UniformityResult uniformity_check(const std::vector<double>& coords, double lo,
                                  double hi);

void write_fit_json(const ThomasFit& fit, const std::string& path);

}  // namespace cylk
