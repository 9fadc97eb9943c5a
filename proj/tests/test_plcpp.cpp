#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cylk/numeric.hpp"
#include "cylk/plcpp.hpp"
#include "cylk/rng.hpp"
#include "cylk/vmf.hpp"

using namespace cylk;

TEST_CASE("vmf density normalization and uniform limits") {
  const UnitVector mu2 = UnitVector::from_angle(1.0);
  CHECK(vmf_density(UnitVector::from_angle(2.5), mu2, 0.0) ==
        doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-12));
  const UnitVector mu3 = UnitVector::normalized(Vec(1, 1, 1));
  CHECK(vmf_density(UnitVector::axis(3, 0), mu3, 0.0) ==
        doctest::Approx(1.0 / (4.0 * kPi)).epsilon(1e-10));

  for (double kappa : {0.5, 5.0, 40.0}) {
    // d = 2: integrate over the circle
    const double total2 = integrate(
        [&](double phi) { return vmf_density(UnitVector::from_angle(phi), mu2, kappa); },
        0.0, 2.0 * kPi, 256);
    CHECK(total2 == doctest::Approx(1.0).epsilon(1e-8));
    // d = 3: product rule over the sphere around the pole
    const QuadRule& rule = gauss_legendre(96);
    double total3 = 0.0;
    for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
      const double psi = kPi / 2.0 * (rule.nodes[a] + 1.0);
      for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
        const double az = kPi * (rule.nodes[b] + 1.0);
        const UnitVector u = UnitVector::normalized(Vec(std::sin(psi) * std::cos(az),
                                                        std::sin(psi) * std::sin(az),
                                                        std::cos(psi)));
        total3 += rule.weights[a] * rule.weights[b] * vmf_density(u, mu3, kappa) *
                  std::sin(psi) * (kPi / 2.0) * kPi;
      }
    }
    CHECK(total3 == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("vmf sampler: uniform case, concentration, histogram oracle") {
  RngStream rng(51, 0);
  // kappa = 0 on the circle: chi-square over 36 bins
  {
    const UnitVector mu = UnitVector::from_angle(0.3);
    std::vector<double> counts(36, 0.0), expected(36, 100000.0 / 36.0);
    for (int i = 0; i < 100000; ++i) {
      const double a = sample_vmf(mu, 0.0, rng).angle();
      ++counts[static_cast<std::size_t>(std::min(35.0, a / (2.0 * kPi) * 36.0))];
    }
    CHECK(chi_square_gof_pvalue(counts, expected) > 0.01);
  }
  // kappa = 40 at 117 degrees: circular mean within a degree
  {
    const double theta = 117.0 * kPi / 180.0;
    const UnitVector mu = UnitVector::from_angle(theta);
    double sx = 0.0, sy = 0.0;
    for (int i = 0; i < 100000; ++i) {
      const UnitVector u = sample_vmf(mu, 40.0, rng);
      sx += u[0];
      sy += u[1];
    }
    double mean_angle = std::atan2(sy, sx);
    CHECK(std::abs(mean_angle - theta) * 180.0 / kPi < 1.0);
  }
  // histogram against the density, d = 2, kappa = 5
  {
    const UnitVector mu = UnitVector::from_angle(2.0);
    const int bins = 18, n = 200000;
    std::vector<double> counts(bins, 0.0), expected(bins, 0.0);
    for (int i = 0; i < n; ++i) {
      const double a = sample_vmf(mu, 5.0, rng).angle();
      ++counts[static_cast<std::size_t>(
          std::min(static_cast<double>(bins - 1), a / (2.0 * kPi) * bins))];
    }
    for (int b = 0; b < bins; ++b) {
      expected[static_cast<std::size_t>(b)] =
          n * integrate(
                  [&](double phi) {
                    return vmf_density(UnitVector::from_angle(phi), mu, 5.0);
                  },
                  2.0 * kPi * b / bins, 2.0 * kPi * (b + 1) / bins, 32);
    }
    int misses = 0;
    for (int b = 0; b < bins; ++b) {
      const double e = expected[static_cast<std::size_t>(b)];
      const double se = std::sqrt(e * (1.0 - e / n));
      if (std::abs(counts[static_cast<std::size_t>(b)] - e) > 3.0 * std::max(se, 1.0))
        ++misses;
    }
    CHECK(misses <= 1);  // 18 simultaneous 3-sigma checks
  }
  // d = 3 consistency: mean resultant direction aligns with mu
  {
    const UnitVector mu = UnitVector::normalized(Vec(1, -2, 2));
    Vec sum = Vec::zero(3);
    for (int i = 0; i < 50000; ++i) sum = sum + sample_vmf(mu, 20.0, rng).vec();
    const UnitVector mean = UnitVector::normalized(sum);
    CHECK(mean.vec().dot(mu.vec()) > 0.999);
  }
}

TEST_CASE("beta from the rose of directions") {
  const UnitVector e2 = UnitVector::axis(2, 1);
  const PlcppParams deg(3.0, e2, 0.0, 1.0, 1e-4, true);
  CHECK(beta_from_rose(deg) == doctest::Approx(3.0));
  // kappa = 0 in d = 2: E|sin phi| = 2/pi
  const PlcppParams iso(5.0, e2, 0.0, 1.0, 1e-4);
  CHECK(beta_from_rose(iso) == doctest::Approx(5.0 * 2.0 / kPi).epsilon(1e-8));
  // strong concentration at the pole approaches rho_L
  const PlcppParams conc(5.0, e2, 500.0, 1.0, 1e-4);
  CHECK(beta_from_rose(conc) == doctest::Approx(5.0).epsilon(1e-3));
  // beta <= rho_L, rose round-trip through (beta, M)
  for (double kappa : {0.3, 2.0, 10.0}) {
    const double mean_abs = mean_abs_last(e2, kappa);
    CHECK(mean_abs <= 1.0 + 1e-12);
    // E_M[1/|u_d|] * E_R[|u_d|] == 1 for M(du) prop |u_d| R(du)
    const double inv_mean = integrate(
        [&](double phi) {
          const UnitVector u = UnitVector::from_angle(phi);
          return vmf_density(u, e2, kappa) * std::abs(u.last()) / mean_abs *
                 (1.0 / std::abs(u.last()));
        },
        1e-9, 2.0 * kPi - 1e-9, 512);
    CHECK(inv_mean * mean_abs == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("intensity I closed forms and Monte Carlo agreement") {
  const double a = 0.55;
  const BoxWindow ext(Vec(-a, -a), Vec(a, a));
  const UnitVector e2 = UnitVector::axis(2, 1);
  // uniform rose in d = 2: I = 8a/pi
  CHECK(intensity_I(e2, 0.0, false, ext) == doctest::Approx(8.0 * a / kPi).epsilon(1e-8));
  // degenerate: the straight shadow
  CHECK(intensity_I(e2, 0.0, true, ext) == doctest::Approx(2.0 * a));
  // strong concentration approaches the straight shadow at the 1/sqrt(kappa)
  // rate: I ~ 2a (1 - 1/(2 kappa) + sqrt(2/(pi kappa)))
  const double kappa_big = 600.0;
  const double asym =
      2.0 * a * (1.0 - 0.5 / kappa_big + std::sqrt(2.0 / (kPi * kappa_big)));
  CHECK(intensity_I(e2, kappa_big, false, ext) == doctest::Approx(asym).epsilon(1e-3));

  // d = 3 Monte Carlo oracle: E[lambda(J_u) |u_3|] under the rose
  RngStream rng(52, 0);
  const BoxWindow ext3(Vec(0, 0, 0), Vec(1.0, 0.8, 1.2));
  const UnitVector mu = UnitVector::normalized(Vec(0.2, 0.1, 0.97));
  const double kappa = 3.0;
  RunningStats st;
  for (int i = 0; i < 200000; ++i) {
    const UnitVector u = sample_vmf(mu, kappa, rng);
    if (std::abs(u.last()) < 1e-12) continue;
    st.add(lateral_measure(u, ext3) * std::abs(u.last()));
  }
  const double quad = intensity_I(mu, kappa, false, ext3);
  CHECK(std::abs(st.mean - quad) < 3.0 * st.std_error());
  CHECK(std::abs(st.mean - quad) / quad < 0.005);
}

TEST_CASE("line process sampling: counts, direction law, degenerate case") {
  RngStream rng(53, 0);
  const double a = 0.5;
  const BoxWindow ext(Vec(-a, -a), Vec(a, a));
  const UnitVector mu = UnitVector::from_angle(0.9);
  const PlcppParams params(5.0, mu, 2.0, 1.0, 1e-4);
  const double expect = 5.0 * intensity_I(mu, 2.0, false, ext);

  RunningStats count;
  std::vector<double> bin_counts(8, 0.0);
  long long total_lines = 0;
  const int reps = 10000;
  for (int rep = 0; rep < reps; ++rep) {
    const LineSample ls = sample_line_process(params, ext, rng);
    count.add(static_cast<double>(ls.lines.size()));
    for (const DirectedLine& l : ls.lines) {
      const double ang = l.direction.angle();
      ++bin_counts[static_cast<std::size_t>(std::min(7.0, ang / (2.0 * kPi) * 8.0))];
      ++total_lines;
    }
  }
  CHECK(std::abs(count.mean - expect) < 3.0 * count.std_error());

  // directions follow |u_2| lambda(J_u) f(u) up to normalization
  std::vector<double> bin_expected(8, 0.0);
  for (int b = 0; b < 8; ++b) {
    bin_expected[static_cast<std::size_t>(b)] =
        static_cast<double>(total_lines) *
        integrate(
            [&](double phi) {
              const UnitVector u = UnitVector::from_angle(phi);
              return std::abs(u.last()) * lateral_measure(u, ext) *
                     vmf_density(u, mu, 2.0);
            },
            2.0 * kPi * b / 8, 2.0 * kPi * (b + 1) / 8, 64) /
        intensity_I(mu, 2.0, false, ext);
  }
  int misses = 0;
  for (int b = 0; b < 8; ++b) {
    const double e = bin_expected[static_cast<std::size_t>(b)];
    if (std::abs(bin_counts[static_cast<std::size_t>(b)] - e) > 3.0 * std::sqrt(e + 1.0))
      ++misses;
  }
  CHECK(misses <= 1);

  // the bare-sine acceptance variant leaves the count law intact
  const LineSample naive = sample_line_process(params, ext, rng, LineProposal::SineOnly);
  CHECK(naive.lines.size() < 60);

  // degenerate: directions exactly e_d, anchors uniform over the shadow
  const PlcppParams deg(20.0, UnitVector::axis(2, 1), 0.0, 1.0, 1e-4, true);
  std::vector<double> anchors;
  for (int rep = 0; rep < 500; ++rep) {
    const LineSample ls = sample_line_process(deg, ext, rng);
    for (const DirectedLine& l : ls.lines) {
      CHECK(l.direction[1] == 1.0);
      anchors.push_back(l.anchor[0]);
    }
  }
  const KsResult ks =
      ks_test(anchors, [&](double x) { return std::clamp((x + a) / (2 * a), 0.0, 1.0); });
  CHECK(ks.p_value > 0.01);
}

TEST_CASE("simulation: empty limit, intensity, lateral displacements") {
  RngStream rng(54, 0);
  const BoxWindow sq(Vec(-0.5, -0.5), Vec(0.5, 0.5));
  const BoxWindow ext = sq.inflated(0.05);

  const PlcppParams tiny(1e-9, UnitVector::from_angle(1.0), 1.0, 1e-9, 1e-4);
  CHECK(simulate(tiny, sq, ext, rng).pattern.size() == 0);

  const PlcppParams params(10.0, UnitVector::from_angle(0.6), 5.0, 30.0, 4e-4);
  RunningStats st;
  for (int rep = 0; rep < 500; ++rep) {
    const LatentRealization lat = simulate(params, sq, ext, rng, true);
    st.add(static_cast<double>(lat.pattern.size()) / sq.volume());
    // displacements lie in the perpendicular hyperplane of their line
    for (std::size_t li = 0; li < lat.lines.size() && rep < 5; ++li) {
      for (std::size_t k = 0; k < lat.parents[li].size(); ++k) {
        const Vec z = lat.displaced[li][k] - lat.parents[li][k];
        CHECK(std::abs(z.dot(lat.lines[li].direction.vec())) < 1e-10);
      }
    }
  }
  CHECK(std::abs(st.mean - intensity_theoretical(params)) < 3.0 * st.std_error());
}

TEST_CASE("pair correlation function: clustering, limits, Monte Carlo oracle") {
  const PlcppParams deg(0.02, UnitVector::axis(3, 2), 0.0, 1.0, 15.0, true);
  // degenerate closed form on H
  const Vec x(3.0, 4.0, 0.0);
  const double expected = 1.0 + std::exp(-25.0 / (4.0 * 15.0)) /
                                    (4.0 * kPi * 15.0 * 0.02);
  CHECK(pcf_theoretical(deg, x) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(pcf_theoretical(deg, Vec(800.0, 0.0, 0.0)) == doctest::Approx(1.0).epsilon(1e-9));

  RngStream rng(55, 0);
  const UnitVector mu = UnitVector::normalized(Vec(0.3, 0.2, 0.93));
  const PlcppParams gen(5.0, mu, 8.0, 1.0, 0.01);
  for (const Vec& lag : {Vec(0.05, 0.0, 0.0), Vec(0.0, 0.12, 0.05)}) {
    CHECK(pcf_theoretical(gen, lag) > 1.0);
    RunningStats mc;
    for (int i = 0; i < 200000; ++i) {
      const UnitVector u = sample_vmf(mu, 8.0, rng);
      const double s = lag.dot(u.vec());
      const double lat2 = std::max(0.0, lag.norm2() - s * s);
      mc.add(std::exp(-lat2 / (4.0 * gen.sigma2)) / (4.0 * kPi * gen.sigma2));
    }
    const double quad = (pcf_theoretical(gen, lag) - 1.0) * gen.rho_L;
    CHECK(std::abs(mc.mean - quad) < 3.0 * mc.std_error());
  }
}

TEST_CASE("line length identities of the stationary line process") {
  RngStream rng(56, 0);
  const BoxWindow cube(Vec(0, 0, 0), Vec(1, 1, 1));
  // single vertical line through the unit cube
  LineSample one;
  one.lines.emplace_back(Vec(0.5, 0.5, 0.0), UnitVector::axis(3, 2));
  CHECK(line_length_in(one, cube) == doctest::Approx(1.0));

  // mean length per unit volume recovers rho_L (d = 2 for speed)
  const BoxWindow sq(Vec(-0.5, -0.5), Vec(0.5, 0.5));
  const UnitVector mu = UnitVector::from_angle(1.2);
  const PlcppParams params(4.0, mu, 3.0, 1.0, 1e-4);
  RunningStats st;
  for (int rep = 0; rep < 4000; ++rep) {
    const LineSample ls = sample_line_process(params, sq, rng);
    st.add(line_length_in(ls, sq) / sq.volume());
  }
  CHECK(std::abs(st.mean - 4.0) < 3.0 * st.std_error());
}

TEST_CASE("parameter validation and the theoretical intensity") {
  const UnitVector e2 = UnitVector::axis(2, 1);
  CHECK_THROWS_AS(PlcppParams(-1.0, e2, 0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(PlcppParams(1.0, UnitVector::from_angle(0.3), 0.0, 1.0, 1.0, true),
                  std::invalid_argument);
  const PlcppParams micro(0.024, UnitVector::axis(3, 2), 0.0, 0.37 / 320.0, 15.04,
                              true);
  CHECK(intensity_theoretical(micro) == doctest::Approx(2.775e-5).epsilon(1e-3));
  const PlcppParams tiny_alpha(1.0, e2, 0.0, 1e-300, 1.0);
  CHECK(intensity_theoretical(tiny_alpha) == doctest::Approx(0.0));
}
