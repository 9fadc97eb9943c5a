#include <doctest.h>

#include <cmath>
#include <limits>

#include "cylk/bayes.hpp"
#include "cylk/numeric.hpp"
#include "cylk/plcpp.hpp"
#include "cylk/rng.hpp"
#include "cylk/vmf.hpp"

using namespace cylk;

namespace {

PointPattern toy_data(int n, RngStream& rng, const BoxWindow& w) {
  std::vector<Vec> pts;
  for (int i = 0; i < n; ++i) {
    Vec x = Vec::zero(w.dim());
    for (int a = 0; a < w.dim(); ++a) x[a] = rng.uniform(w.lower[a], w.upper[a]);
    pts.push_back(x);
  }
  return PointPattern(std::move(pts), w);
}

BayesConfig quad_config() {
  BayesConfig cfg;
  cfg.integral_mode = IntegralMode::Quadrature;
  cfg.kappa_fixed = true;
  cfg.kappa = 10.0;
  cfg.iterations = 10;
  cfg.burn_in = 1;
  return cfg;
}

McmcState random_tiny_state(int k, const BoxWindow& w_ext, RngStream& rng) {
  McmcState s;
  s.rho_L = rng.uniform(2.0, 8.0);
  s.mu = UnitVector::from_angle(rng.uniform(0.0, 2.0 * kPi)).vec();
  s.kappa = 10.0;
  s.alpha = rng.uniform(2.0, 10.0);
  s.sigma2 = rng.uniform(0.002, 0.01);
  for (int j = 0; j < k; ++j) {
    const UnitVector u = sample_vmf(UnitVector(s.mu), s.kappa, rng);
    const Vec y = sample_uniform_anchor(u, w_ext, rng);
    s.lines.push_back({DirectedLine(y, u), 0, 0.0, {}});
  }
  return s;
}

}  // namespace

TEST_CASE("window kernel integral: limits and quadrature agreement") {
  RngStream rng(81, 0);
  const BoxWindow sq(Vec(-0.5, -0.5), Vec(0.5, 0.5));
  const DirectedLine diag(Vec(0.1, 0.0), UnitVector::from_angle(1.1));

  // sigma^2 -> 0 concentrates the mass on the clipped segment
  const auto clip = clip_line_params(diag, sq);
  REQUIRE(clip);
  const double len = clip->second - clip->first;
  RngStream mc1(82, 0);
  const McEstimate tiny = window_kernel_integral(diag, 1e-6, sq, 20000, mc1);
  CHECK(std::abs(tiny.value - len) / len < 0.01);

  // a window much wider than sigma captures the full lateral mass
  const BoxWindow big(Vec(-50.0, -50.0), Vec(50.0, 50.0));
  const DirectedLine mid(Vec(0.0, 0.0), UnitVector::from_angle(0.8));
  const auto bigclip = clip_line_params(mid, big);
  RngStream mc2(83, 0);
  const McEstimate full = window_kernel_integral(mid, 0.01, big, 20000, mc2);
  CHECK(full.value ==
        doctest::Approx(bigclip->second - bigclip->first).epsilon(0.01));

  // agreement with the deterministic quadrature within 3 standard errors
  int misses = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const double phi = rng.uniform(0.15, kPi - 0.15);
    const DirectedLine l(Vec(rng.uniform(-0.6, 0.6), 0.0), UnitVector::from_angle(phi));
    if (!line_hits_box(l, sq)) continue;
    const double sigma2 = rng.uniform(0.001, 0.05);
    RngStream mc(84, static_cast<std::uint64_t>(rep));
    const McEstimate est = window_kernel_integral(l, sigma2, sq, 4000, mc);
    const double quad = window_kernel_integral_quad(l, sigma2, sq);
    if (std::abs(est.value - quad) > 3.0 * std::max(est.std_error, 1e-9)) ++misses;
  }
  CHECK(misses <= 2);

  // d = 3 quadrature sanity: vertical line in a tall box keeps full mass
  const BoxWindow cube(Vec(-1, -1, 0), Vec(1, 1, 1));
  const DirectedLine vert(Vec(0.0, 0.0, 0.0), UnitVector::axis(3, 2));
  CHECK(window_kernel_integral_quad(vert, 1e-4, cube, 48) ==
        doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("gibbs draws follow the stated gamma laws") {
  RngStream rng(85, 0);
  const BoxWindow sq(Vec(-0.5, -0.5), Vec(0.5, 0.5));
  const BoxWindow ext = sq.inflated(0.05);
  const PointPattern data = toy_data(10, rng, sq);
  BayesConfig cfg = quad_config();
  cfg.alpha_shape = 1.0;
  cfg.alpha_rate = 1.0;
  Sampler smp(data, cfg, ext);
  smp.init();

  // pin the cached line integrals to sum to 2
  auto& lines = smp.state_mutable().lines;
  REQUIRE(lines.size() >= 1);
  for (auto& l : lines) l.c_integral = 0.0;
  lines[0].c_integral = 2.0;

  std::vector<double> draws;
  RngStream gr(86, 0);
  for (int i = 0; i < 100000; ++i) {
    smp.gibbs_update_alpha(gr);
    draws.push_back(smp.state().alpha);
  }
  // alpha | rest ~ Gamma(a1 + n, b1 + sum c_j) = Gamma(11, 3)
  const KsResult ks = ks_test(draws, [](double x) { return gamma_cdf(x, 11.0, 3.0); });
  CHECK(ks.p_value > 0.01);

  // posterior mean approaches n / sum(c) as the prior flattens
  cfg.alpha_shape = 1e-4;
  cfg.alpha_rate = 1e-4;
  Sampler flat(data, cfg, ext);
  flat.init();
  auto& fl = flat.state_mutable().lines;
  for (auto& l : fl) l.c_integral = 0.0;
  fl[0].c_integral = 2.0;
  RunningStats st;
  for (int i = 0; i < 20000; ++i) {
    flat.gibbs_update_alpha(gr);
    st.add(flat.state().alpha);
  }
  CHECK(st.mean == doctest::Approx(10.0 / 2.0).epsilon(0.03));

  // rho_L | rest ~ Gamma(a2 + k, b2 + I)
  std::vector<double> rdraws;
  const double shape = cfg.rho_L_shape + static_cast<double>(smp.state().k());
  const double rate = cfg.rho_L_rate + smp.cached_intensity_i();
  for (int i = 0; i < 100000; ++i) {
    smp.gibbs_update_rho_L(gr);
    rdraws.push_back(smp.state().rho_L);
  }
  const KsResult ks2 =
      ks_test(rdraws, [&](double x) { return gamma_cdf(x, shape, rate); });
  CHECK(ks2.p_value > 0.01);
}

TEST_CASE("birth and death log ratios negate exactly on adjacent states") {
  RngStream rng(87, 0);
  const BoxWindow sq(Vec(-0.5, -0.5), Vec(0.5, 0.5));
  const BoxWindow ext = sq.inflated(0.05);
  BayesConfig cfg = quad_config();
  for (int rep = 0; rep < 100; ++rep) {
    const PointPattern data = toy_data(1 + static_cast<int>(rng.uniform_index(3)), rng, sq);
    Sampler smp(data, cfg, ext);
    smp.begin_sweep(rep);
    smp.load_state(random_tiny_state(1 + static_cast<int>(rng.uniform_index(3)), ext, rng));

    const UnitVector u = sample_vmf(UnitVector(smp.state().mu), smp.state().kappa, rng);
    const Vec y = sample_uniform_anchor(u, ext, rng);
    const Sampler::LineContrib z = smp.make_contrib(DirectedLine(y, u));
    const double lb = smp.log_birth_ratio(z);
    smp.accept_birth(z);
    const double ld = smp.log_death_ratio(smp.state().k() - 1);
    CHECK(lb + ld == 0.0);
  }
}

namespace {

void check_log_ratio(double got, double oracle) {
  if (std::isinf(got) || std::isinf(oracle)) {
    CHECK(got == oracle);
  } else {
    CHECK(got == doctest::Approx(oracle).epsilon(1e-8));
  }
}

}  // namespace

TEST_CASE("hastings ratios match the from-scratch posterior oracle") {
  RngStream rng(88, 0);
  const BoxWindow sq(Vec(-0.5, -0.5), Vec(0.5, 0.5));
  const BoxWindow ext = sq.inflated(0.05);
  BayesConfig cfg = quad_config();
  cfg.kappa_fixed = false;  // exercise the kappa ratio too

  for (int rep = 0; rep < 25; ++rep) {
    const PointPattern data = toy_data(1 + static_cast<int>(rng.uniform_index(3)), rng, sq);
    Sampler smp(data, cfg, ext);
    smp.begin_sweep(rep);
    smp.load_state(random_tiny_state(1 + static_cast<int>(rng.uniform_index(3)), ext, rng));
    const double lp0 = smp.log_unnormalized_posterior();
    if (!std::isfinite(lp0)) continue;  // a datum with no kernel mass

    // birth: logR = dlogpi + log(1/(k+1)) - log f(u|mu,kappa) + log lambda(J_u)
    {
      const UnitVector mu(smp.state().mu);
      const UnitVector u = sample_vmf(mu, smp.state().kappa, rng);
      const Vec y = sample_uniform_anchor(u, ext, rng);
      const Sampler::LineContrib z = smp.make_contrib(DirectedLine(y, u));
      const double lb = smp.log_birth_ratio(z);
      const double k = static_cast<double>(smp.state().k());
      Sampler twin = smp;
      twin.accept_birth(z);
      const double oracle = twin.log_unnormalized_posterior() - lp0 -
                            std::log(k + 1.0) -
                            vmf_log_density(u, mu, smp.state().kappa) +
                            std::log(lateral_measure(u, ext));
      check_log_ratio(lb, oracle);
    }
    // death of a random line (only when k >= 2)
    if (smp.state().k() >= 2) {
      const std::size_t j = rng.uniform_index(smp.state().k());
      const UnitVector mu(smp.state().mu);
      const UnitVector uj = smp.state().lines[j].line.direction;
      const double ld = smp.log_death_ratio(j);
      Sampler twin = smp;
      twin.accept_death(j);
      const double k = static_cast<double>(smp.state().k());
      const double oracle = twin.log_unnormalized_posterior() - lp0 +
                            std::log(k) +
                            vmf_log_density(uj, mu, smp.state().kappa) -
                            std::log(lateral_measure(uj, ext));
      check_log_ratio(ld, oracle);
    }
    // move = death of j then birth of z at the same slot
    {
      const std::size_t j = rng.uniform_index(smp.state().k());
      const UnitVector mu(smp.state().mu);
      const UnitVector u = sample_vmf(mu, smp.state().kappa, rng);
      const Vec y = sample_uniform_anchor(u, ext, rng);
      const Sampler::LineContrib z = smp.make_contrib(DirectedLine(y, u));
      const UnitVector uj = smp.state().lines[j].line.direction;
      const double lm = smp.log_move_ratio(j, z);
      Sampler twin = smp;
      twin.accept_move(j, z);
      const double oracle = twin.log_unnormalized_posterior() - lp0 -
                            vmf_log_density(u, mu, smp.state().kappa) +
                            std::log(lateral_measure(u, ext)) +
                            vmf_log_density(uj, mu, smp.state().kappa) -
                            std::log(lateral_measure(uj, ext));
      check_log_ratio(lm, oracle);
    }
    // mu random walk (symmetric vMF proposal, so the proposal terms cancel;
    // verified against the brute-force ratio with both proposal densities)
    {
      const UnitVector mu(smp.state().mu);
      const UnitVector mu_prop = sample_vmf(mu, cfg.proposal_kappa0, rng);
      double i_prop = 0.0;
      const double lr = smp.log_mu_ratio(mu_prop, i_prop);
      Sampler twin = smp;
      twin.state_mutable().mu = mu_prop.vec();
      twin.load_state(twin.state());
      const double fwd = vmf_log_density(mu_prop, mu, cfg.proposal_kappa0);
      const double rev = vmf_log_density(mu, mu_prop, cfg.proposal_kappa0);
      CHECK(fwd == doctest::Approx(rev).epsilon(1e-12));
      const double oracle = twin.log_unnormalized_posterior() - lp0 + rev - fwd;
      check_log_ratio(lr, oracle);
    }
    // kappa random walk
    {
      const double kp = smp.state().kappa + rng.normal(0.0, 2.0);
      double i_prop = 0.0;
      const double lr = smp.log_kappa_ratio(kp, i_prop);
      if (kp > 0 && kp <= cfg.kappa_max) {
        Sampler twin = smp;
        twin.state_mutable().kappa = kp;
        twin.load_state(twin.state());
        const double oracle = twin.log_unnormalized_posterior() - lp0;
        check_log_ratio(lr, oracle);
      } else {
        CHECK(lr == -std::numeric_limits<double>::infinity());
      }
    }
    // sigma2 random walk
    {
      const double sp = smp.state().sigma2 + rng.normal(0.0, 0.002);
      const double lr = smp.log_sigma2_ratio(sp);
      if (sp > 0 && sp <= smp.sigma2_max()) {
        Sampler twin = smp;
        twin.state_mutable().sigma2 = sp;
        twin.load_state(twin.state());
        const double oracle = twin.log_unnormalized_posterior() - lp0;
        check_log_ratio(lr, oracle);
      } else {
        CHECK(lr == -std::numeric_limits<double>::infinity());
      }
    }
  }
}

TEST_CASE("a far-away line shifts the log posterior by its own prior weight") {
  RngStream rng(89, 0);
  const BoxWindow sq(Vec(-0.5, -0.5), Vec(0.5, 0.5));
  const BoxWindow ext = sq.inflated(12.0);  // room for a far line
  BayesConfig cfg = quad_config();
  const PointPattern data = toy_data(3, rng, sq);
  Sampler smp(data, cfg, ext);
  smp.begin_sweep(0);
  McmcState s = random_tiny_state(2, ext, rng);
  s.sigma2 = 0.05;  // wide enough that every datum keeps positive intensity
  for (auto& l : s.lines) l.line = line_through(Vec(rng.uniform(-0.4, 0.4),
                                                    rng.uniform(-0.4, 0.4)),
                                                l.line.direction);
  smp.load_state(s);
  const double lp0 = smp.log_unnormalized_posterior();
  REQUIRE(std::isfinite(lp0));
  // nearly vertical line far outside the data window
  const UnitVector u = UnitVector::from_angle(0.5 * kPi + 0.01);
  const DirectedLine far(Vec(10.5, 0.0), u);
  const Sampler::LineContrib z = smp.make_contrib(far);
  for (double kv : z.kernel) CHECK(kv == 0.0);
  Sampler twin = smp;
  twin.accept_birth(z);
  const double delta = twin.log_unnormalized_posterior() - lp0;
  const double expected = std::log(smp.state().rho_L) +
                          std::log(std::abs(u.last())) +
                          vmf_log_density(u, UnitVector(smp.state().mu), s.kappa) -
                          smp.state().alpha * z.c_integral;
  CHECK(delta == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("cache coherence after a short run") {
  RngStream rng(90, 0);
  const BoxWindow sq(Vec(-0.5, -0.5), Vec(0.5, 0.5));
  const BoxWindow ext = sq.inflated(0.05);
  const PointPattern data = toy_data(20, rng, sq);
  BayesConfig cfg = quad_config();
  cfg.iterations = 60;
  cfg.burn_in = 10;
  cfg.thin = 5;
  Sampler smp(data, cfg, ext);
  smp.init();
  RngStream chain(91, 0);
  for (long long it = 0; it < 50; ++it) {
    smp.begin_sweep(it);
    smp.gibbs_update_alpha(chain);
    smp.gibbs_update_rho_L(chain);
    smp.mh_update_mu(chain);
    smp.mh_update_sigma2(chain);
    for (int a = 0; a < 5; ++a) smp.birth_death_move(chain);
  }
  // recompute every cache from scratch and compare
  for (const LineState& l : smp.state().lines) {
    const double c = window_kernel_integral_quad(l.line, smp.state().sigma2, sq);
    CHECK(l.c_integral == doctest::Approx(c).epsilon(1e-9));
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double kv = smp.kernel_value(data.points[i], l.line, smp.state().sigma2);
      CHECK(l.kernel[i] == doctest::Approx(kv).epsilon(1e-12));
    }
  }
  // intensity cache matches a recomputation
  CHECK(smp.cached_intensity_i() ==
        doctest::Approx(intensity_I(UnitVector(smp.state().mu), smp.state().kappa,
                                    false, ext))
            .epsilon(1e-12));
}

TEST_CASE("null death at k = 1 keeps the state") {
  RngStream rng(92, 0);
  const BoxWindow sq(Vec(-0.5, -0.5), Vec(0.5, 0.5));
  const BoxWindow ext = sq.inflated(0.05);
  const PointPattern data = toy_data(3, rng, sq);
  BayesConfig cfg = quad_config();
  Sampler smp(data, cfg, ext);
  smp.begin_sweep(0);
  smp.load_state(random_tiny_state(1, ext, rng));
  int nulls = 0;
  for (int i = 0; i < 200; ++i) {
    if (smp.state().k() == 1) {
      const int code = smp.birth_death_move(rng);
      if (code == 0) ++nulls;
      CHECK(smp.state().k() >= 1);
    } else {
      smp.birth_death_move(rng);
    }
  }
  CHECK(nulls > 0);
}

TEST_CASE("run_chain is deterministic and reports sane acceptance rates") {
  RngStream rng(93, 0);
  const BoxWindow sq(Vec(-0.5, -0.5), Vec(0.5, 0.5));
  const BoxWindow ext = sq.inflated(0.05);
  const PlcppParams gen(8.0, UnitVector::from_angle(1.0), 30.0, 10.0, 4e-4);
  const PointPattern data = simulate(gen, sq, ext, rng).pattern;
  REQUIRE(data.size() >= 10);

  BayesConfig cfg;
  cfg.kappa_fixed = true;
  cfg.kappa = 30.0;
  cfg.iterations = 400;
  cfg.burn_in = 100;
  cfg.thin = 10;
  cfg.seed = 12345;
  cfg.mc_samples = 128;
  const McmcTrace t1 = run_chain(data, cfg, ext);
  const McmcTrace t2 = run_chain(data, cfg, ext);
  REQUIRE(t1.rows.size() == t2.rows.size());
  REQUIRE(!t1.rows.empty());
  for (std::size_t i = 0; i < t1.rows.size(); ++i) {
    CHECK(t1.rows[i].rho_L == t2.rows[i].rho_L);
    CHECK(t1.rows[i].alpha == t2.rows[i].alpha);
    CHECK(t1.rows[i].sigma2 == t2.rows[i].sigma2);
    CHECK(t1.rows[i].k == t2.rows[i].k);
    CHECK(t1.rows[i].log_post == t2.rows[i].log_post);
  }
  for (const TraceRow& r : t1.rows) {
    CHECK(r.k >= 1);
    CHECK(std::isfinite(r.log_post));
  }
  CHECK(t1.acc_mu <= t1.prop_mu);
  CHECK(t1.acc_sigma2 <= t1.prop_sigma2);
}

TEST_CASE("line density raster marks exactly the crossed cells") {
  // single vertical line: one full pixel column
  LineSample one;
  one.lines.emplace_back(Vec(0.52, 0.0), UnitVector::axis(2, 1));
  const BoxWindow sq(Vec(0, 0), Vec(1, 1));
  const std::vector<double> grid = line_density_raster({one}, sq, 10, 10);
  for (int iy = 0; iy < 10; ++iy)
    for (int ix = 0; ix < 10; ++ix)
      CHECK(grid[static_cast<std::size_t>(iy) * 10 + static_cast<std::size_t>(ix)] ==
            (ix == 5 ? 1.0 : 0.0));

  // diagonal line; every value in [0,1] and the diagonal cells are hit
  LineSample diag;
  diag.lines.emplace_back(Vec(0.0, 0.0), UnitVector::normalized(Vec(1.0, 1.0)));
  const std::vector<double> g2 = line_density_raster({one, diag}, sq, 10, 10);
  for (double v : g2) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  for (int i = 0; i < 10; ++i)
    CHECK(g2[static_cast<std::size_t>(i) * 10 + static_cast<std::size_t>(i)] >= 0.5);
}
