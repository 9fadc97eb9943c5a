#include <doctest.h>

#include <cmath>

#include "cylk/fit.hpp"
#include "cylk/numeric.hpp"
#include "cylk/plcpp.hpp"
#include "cylk/rng.hpp"

using namespace cylk;

TEST_CASE("projection drops one coordinate and keeps the count") {
  const BoxWindow cube(Vec(0, 0, 0), Vec(5, 5, 5));
  const PointPattern p({Vec(1, 2, 3), Vec(4, 4, 1)}, cube);
  const auto [proj, interval] = project_pattern(p, 2);
  CHECK(proj.dim == 2);
  CHECK(proj.size() == 2);
  CHECK(proj.points[0][0] == 1.0);
  CHECK(proj.points[0][1] == 2.0);
  CHECK(interval.first == 0.0);
  CHECK(interval.second == 5.0);
  const auto [proj0, iv0] = project_pattern(p, 0);
  CHECK(proj0.points[0][0] == 2.0);
  CHECK(proj0.points[0][1] == 3.0);
  (void)iv0;
}

TEST_CASE("thomas K closed form: limits and quadrature of g_I") {
  CHECK(thomas_k_theoretical(0.024, 15.04, 0.0) == 0.0);
  // excess over pi r^2 saturates at 1/rho_L
  const double r_big = 1000.0;
  CHECK(thomas_k_theoretical(0.024, 15.04, r_big) - kPi * r_big * r_big ==
        doctest::Approx(1.0 / 0.024).epsilon(1e-9));
  // radial integration of g_I reproduces the closed form
  for (auto [rho_L, sigma2] : {std::pair{0.024, 15.04}, std::pair{1.0, 1.0}}) {
    for (double r : {0.5, 2.0, 10.0}) {
      const double numeric = integrate(
          [&, rl = rho_L, s2 = sigma2](double s) {
            const double g =
                1.0 + std::exp(-s * s / (4.0 * s2)) / (4.0 * kPi * s2 * rl);
            return 2.0 * kPi * s * g;
          },
          0.0, r, 200);
      CHECK(numeric == doctest::Approx(thomas_k_theoretical(rho_L, sigma2, r))
                           .epsilon(1e-8));
    }
  }
  CHECK(thomas_k_theoretical(2.0, 1.0, 1.0) > thomas_k_theoretical(2.0, 1.0, 0.5));
  CHECK(thomas_k_theoretical(1.0, 1.0, 1.0) > thomas_k_theoretical(2.0, 1.0, 1.0));
}

TEST_CASE("exact theoretical curve is a zero-contrast fixed point") {
  const double rho_L = 0.05, sigma2 = 9.0;
  std::vector<double> grid, vals;
  for (int i = 0; i < 64; ++i) {
    const double r = 0.5 + 30.0 * (i + 0.5) / 64.0;
    grid.push_back(r);
    vals.push_back(thomas_k_theoretical(rho_L, sigma2, r));
  }
  const SummaryCurve k_hat = make_curve(grid, vals, "K_iso");
  ContrastConfig cfg;
  const ThomasFit fit = min_contrast_fit_curve(k_hat, 600.0, 70000.0, 320.0, cfg);
  CHECK(fit.rho_L_hat == doctest::Approx(rho_L).epsilon(1e-4));
  CHECK(fit.sigma2_hat == doctest::Approx(sigma2).epsilon(1e-4));
  CHECK(fit.contrast_value < 1e-12);
  CHECK(fit.converged);
}

TEST_CASE("estimate relation at a microscopy-like scale") {
  const double rho_i = 623.0 / (508.0 * 138.0);
  const double alpha_hat = rho_i / (0.024 * 320.0);
  CHECK(alpha_hat == doctest::Approx(0.37 / 320.0).epsilon(2e-3));
}

TEST_CASE("recovery on one synthetic degenerate realization") {
  RngStream rng(71, 0);
  // microscopy-like scale: D = [0,508] x [0,138], I = [0,320]
  const BoxWindow w(Vec(0, 0, 0), Vec(508, 138, 320));
  const PlcppParams params(0.024, UnitVector::axis(3, 2), 0.0, 0.37 / 320.0, 15.04,
                           true);
  const BoxWindow ext = default_extended_window(params, w);
  const PointPattern sim = simulate(params, w, ext, rng).pattern;
  REQUIRE(sim.size() > 300);
  const auto [proj, interval] = project_pattern(sim, 2);
  ContrastConfig cfg;
  cfg.seed = 7;
  const ThomasFit fit = min_contrast_fit(proj, interval.second - interval.first, cfg);
  CHECK(std::abs(fit.rho_L_hat - 0.024) / 0.024 < 0.5);
  CHECK(std::abs(fit.sigma2_hat - 15.04) / 15.04 < 0.5);
  CHECK(std::abs(fit.alpha_hat - 0.37 / 320.0) / (0.37 / 320.0) < 0.5);
}

TEST_CASE("fit input validation") {
  const BoxWindow sq(Vec(0, 0), Vec(1, 1));
  std::vector<Vec> few = {Vec(0.1, 0.1), Vec(0.2, 0.2)};
  CHECK_THROWS_AS(min_contrast_fit(PointPattern(few, sq), 1.0, {}), DataError);
}

TEST_CASE("uniformity check") {
  // near-uniform grid: tiny statistic, p close to 1
  std::vector<double> grid;
  const int n = 200;
  for (int i = 0; i < n; ++i) grid.push_back((i + 0.5) / n);
  const UniformityResult ok = uniformity_check(grid, 0.0, 1.0);
  CHECK(ok.statistic == doctest::Approx(0.5 / n).epsilon(1e-9));
  CHECK(ok.p_value > 0.999);
  CHECK(ok.ecdf_args.size() == grid.size());

  const std::vector<double> degenerate(50, 0.5);
  CHECK(uniformity_check(degenerate, 0.0, 1.0).p_value < 1e-6);

  // calibration on z-coordinates of degenerate simulations
  RngStream rng(72, 0);
  const BoxWindow cube(Vec(0, 0, 0), Vec(1, 1, 1));
  const PlcppParams params(20.0, UnitVector::axis(3, 2), 0.0, 15.0, 4e-4, true);
  const BoxWindow ext = default_extended_window(params, cube);
  int rejects = 0, runs = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const PointPattern sim = simulate(params, cube, ext, rng).pattern;
    if (sim.size() < 5) continue;
    std::vector<double> zs;
    for (const Vec& x : sim.points) zs.push_back(x[2]);
    ++runs;
    if (uniformity_check(zs, 0.0, 1.0).p_value < 0.05) ++rejects;
  }
  REQUIRE(runs >= 150);
  // nominal 5 percent rejection
  CHECK(rejects <= runs / 8);
}
