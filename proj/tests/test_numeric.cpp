#include <doctest.h>

#include <cmath>

#include "cylk/geometry.hpp"
#include "cylk/numeric.hpp"
#include "cylk/rng.hpp"

using namespace cylk;

TEST_CASE("gauss_legendre integrates polynomials exactly") {
  // 16-point rule is exact through degree 31
  const double val = integrate([](double x) { return std::pow(x, 7) + 3 * x * x; },
                               -1.0, 2.0, 16);
  const double exact = (std::pow(2.0, 8) - 1.0) / 8.0 + (8.0 + 1.0);
  CHECK(val == doctest::Approx(exact).epsilon(1e-13));
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, kPi, 48) ==
        doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("bessel i0 matches the std implementation across the switch point") {
  for (double x : {0.0, 0.5, 5.0, 14.9, 15.1, 30.0, 80.0}) {
    const double ref = std::log(std::cyl_bessel_i(0.0, x));
    CHECK(log_bessel_i0(x) == doctest::Approx(ref).epsilon(1e-10));
  }
  // large argument stays finite
  CHECK(std::isfinite(log_bessel_i0(700.0)));
}

TEST_CASE("regularized incomplete gamma") {
  for (double x : {0.1, 0.7, 2.0, 9.0}) {
    CHECK(gamma_p(1.0, x) == doctest::Approx(1.0 - std::exp(-x)).epsilon(1e-12));
  }
  CHECK(gamma_p(3.5, 0.0) == 0.0);
  CHECK(gamma_p(3.5, 1e9) == doctest::Approx(1.0));
  CHECK(chi_square_cdf(3.84, 1.0) == doctest::Approx(0.95).epsilon(2e-3));
}

TEST_CASE("ks test accepts its own null and rejects a wrong one") {
  RngStream rng(21, 0);
  std::vector<double> unif;
  for (int i = 0; i < 5000; ++i) unif.push_back(rng.uniform());
  CHECK(ks_test(unif, [](double x) { return std::clamp(x, 0.0, 1.0); }).p_value > 0.01);
  CHECK(ks_test(unif, [](double x) { return std::clamp(x * x, 0.0, 1.0); }).p_value <
        1e-6);
}

TEST_CASE("chi square gof") {
  std::vector<double> obs = {52, 48, 50, 50};
  std::vector<double> expc = {50, 50, 50, 50};
  CHECK(chi_square_gof_pvalue(obs, expc) > 0.9);
  obs = {90, 10, 50, 50};
  CHECK(chi_square_gof_pvalue(obs, expc) < 1e-6);
}

TEST_CASE("nelder mead finds a smooth minimum") {
  auto f = [](const std::vector<double>& x) {
    const double a = x[0] - 1.5, b = x[1] + 0.5;
    return 3.0 + a * a + 2.0 * b * b + 0.3 * a * b;
  };
  const SimplexResult r = nelder_mead(f, {0.0, 0.0}, 1.0);
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.5).epsilon(2e-4));
  CHECK(r.x[1] == doctest::Approx(-0.5).epsilon(2e-4));
}
