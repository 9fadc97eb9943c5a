#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cylk/bayes.hpp"
#include "cylk/envelope.hpp"
#include "cylk/fit.hpp"
#include "cylk/geometry.hpp"
#include "cylk/numeric.hpp"
#include "cylk/pattern.hpp"
#include "cylk/plcpp.hpp"
#include "cylk/rng.hpp"
#include "cylk/summaries.hpp"

namespace py = pybind11;
using namespace cylk;

namespace {

BoxWindow window_from(const std::vector<double>& lower, const std::vector<double>& upper) {
  if (lower.size() != upper.size() || (lower.size() != 2 && lower.size() != 3))
    throw std::invalid_argument("window bounds must both have 2 or 3 entries");
  const int d = static_cast<int>(lower.size());
  Vec lo = Vec::zero(d), hi = Vec::zero(d);
  for (int i = 0; i < d; ++i) {
    lo[i] = lower[static_cast<std::size_t>(i)];
    hi[i] = upper[static_cast<std::size_t>(i)];
  }
  return BoxWindow(lo, hi);
}

PointPattern pattern_from(const py::array_t<double>& pts,
                          const std::vector<double>& lower,
                          const std::vector<double>& upper) {
  const BoxWindow w = window_from(lower, upper);
  if (pts.ndim() != 2 || pts.shape(1) != w.dim())
    throw std::invalid_argument("points must be an (n, d) array matching the window");
  auto r = pts.unchecked<2>();
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(r.shape(0)));
  for (py::ssize_t i = 0; i < r.shape(0); ++i) {
    Vec x = Vec::zero(w.dim());
    for (int a = 0; a < w.dim(); ++a) x[a] = r(i, a);
    out.push_back(x);
  }
  return PointPattern(std::move(out), w);
}

py::array_t<double> points_to_numpy(const PointPattern& p) {
  py::array_t<double> arr({static_cast<py::ssize_t>(p.size()),
                           static_cast<py::ssize_t>(p.dim)});
  auto r = arr.mutable_unchecked<2>();
  for (std::size_t i = 0; i < p.size(); ++i)
    for (int a = 0; a < p.dim; ++a) r(static_cast<py::ssize_t>(i), a) = p.points[i][a];
  return arr;
}

UnitVector unit_from(const std::vector<double>& u) {
  if (u.size() == 2) return UnitVector::normalized(Vec(u[0], u[1]));
  if (u.size() == 3) return UnitVector::normalized(Vec(u[0], u[1], u[2]));
  throw std::invalid_argument("direction must have 2 or 3 entries");
}

PlcppParams params_from(double rho_L, const std::vector<double>& mu, double kappa,
                        double alpha, double sigma2, bool degenerate) {
  return PlcppParams(rho_L, unit_from(mu), kappa, alpha, sigma2, degenerate);
}

py::dict curve_to_dict(const SummaryCurve& c) {
  py::dict d;
  d["args"] = py::array_t<double>(static_cast<py::ssize_t>(c.args.size()), c.args.data());
  d["values"] =
      py::array_t<double>(static_cast<py::ssize_t>(c.values.size()), c.values.data());
  d["statistic"] = c.statistic;
  return d;
}

}  // namespace

PYBIND11_MODULE(_cylk, m) {
  m.doc() = "Cylindrical K-functions and Poisson line cluster point processes";

  py::register_exception<DataError>(m, "DataError");
  py::register_exception<NumericError>(m, "NumericError");

  m.def(
      "simulate_plcpp",
      [](double rho_L, const std::vector<double>& mu, double kappa, double alpha,
         double sigma2, bool degenerate, const std::vector<double>& lower,
         const std::vector<double>& upper, double ext_margin, std::uint64_t seed) {
        const PlcppParams params = params_from(rho_L, mu, kappa, alpha, sigma2, degenerate);
        const BoxWindow w = window_from(lower, upper);
        const BoxWindow w_ext =
            ext_margin > 0 ? w.inflated(ext_margin) : default_extended_window(params, w);
        RngStream rng(seed, 0);
        return points_to_numpy(simulate(params, w, w_ext, rng).pattern);
      },
      py::arg("rho_L"), py::arg("mu"), py::arg("kappa"), py::arg("alpha"),
      py::arg("sigma2"), py::arg("degenerate") = false, py::arg("lower"),
      py::arg("upper"), py::arg("ext_margin") = 0.0, py::arg("seed") = 1,
      "Simulate a Poisson line cluster point process; returns an (n, d) array.");

  m.def(
      "cylindrical_k",
      [](const py::array_t<double>& pts, const std::vector<double>& lower,
         const std::vector<double>& upper, const std::vector<double>& u,
         const std::vector<double>& r_grid, double t, const std::string& correction) {
        const PointPattern p = pattern_from(pts, lower, upper);
        const CorrectionKind corr = correction == "combined"
                                        ? CorrectionKind::Combined
                                        : CorrectionKind::Translation;
        return curve_to_dict(cylindrical_k(p, unit_from(u), r_grid, t, corr));
      },
      py::arg("points"), py::arg("lower"), py::arg("upper"), py::arg("u"),
      py::arg("r_grid"), py::arg("t"), py::arg("correction") = "translation");

  m.def(
      "directional_scan",
      [](const py::array_t<double>& pts, const std::vector<double>& lower,
         const std::vector<double>& upper, const std::vector<double>& phis, double r,
         double t) {
        return curve_to_dict(directional_scan(pattern_from(pts, lower, upper), phis, r, t));
      },
      py::arg("points"), py::arg("lower"), py::arg("upper"), py::arg("phis"),
      py::arg("r"), py::arg("t"));

  m.def(
      "ripley_k",
      [](const py::array_t<double>& pts, const std::vector<double>& lower,
         const std::vector<double>& upper, const std::vector<double>& r_grid) {
        return curve_to_dict(ripley_k(pattern_from(pts, lower, upper), r_grid));
      },
      py::arg("points"), py::arg("lower"), py::arg("upper"), py::arg("r_grid"));

  m.def(
      "fgj",
      [](const py::array_t<double>& pts, const std::vector<double>& lower,
         const std::vector<double>& upper, const std::vector<double>& r_grid,
         int anchors) {
        const FgjResult r = fgj_estimates(pattern_from(pts, lower, upper), r_grid, anchors);
        py::dict d;
        d["F"] = curve_to_dict(r.F);
        d["G"] = curve_to_dict(r.G);
        d["J"] = curve_to_dict(r.J);
        return d;
      },
      py::arg("points"), py::arg("lower"), py::arg("upper"), py::arg("r_grid"),
      py::arg("anchors") = 10000);

  m.def(
      "csr_envelope",
      [](const py::array_t<double>& pts, const std::vector<double>& lower,
         const std::vector<double>& upper, const std::vector<double>& u,
         const std::vector<double>& r_grid, double t, int sims, double level,
         std::uint64_t seed) {
        const PointPattern p = pattern_from(pts, lower, upper);
        CurveStatistic stat;
        stat.kind = CurveStatistic::Kind::CylindricalK;
        stat.direction = unit_from(u).vec();
        stat.grid = r_grid;
        stat.t = t;
        RngStream rng(seed, 0);
        const EnvelopeResult env = csr_envelope(p, stat, sims, level, rng);
        py::dict d;
        d["lower"] = curve_to_dict(env.lower);
        d["upper"] = curve_to_dict(env.upper);
        d["data"] = curve_to_dict(env.data);
        d["p_lower"] = env.p_lower;
        d["p_upper"] = env.p_upper;
        d["data_rank"] = env.data_rank;
        d["exits"] = curve_exits(env);
        return d;
      },
      py::arg("points"), py::arg("lower"), py::arg("upper"), py::arg("u"),
      py::arg("r_grid"), py::arg("t"), py::arg("sims") = 999, py::arg("level") = 0.95,
      py::arg("seed") = 1);

  m.def(
      "fit_thomas",
      [](const py::array_t<double>& pts, const std::vector<double>& lower,
         const std::vector<double>& upper, double i_length, double r_min, double r_max,
         std::uint64_t seed) {
        ContrastConfig cfg;
        cfg.r_min = r_min;
        cfg.r_max = r_max;
        cfg.seed = seed;
        const ThomasFit fit =
            min_contrast_fit(pattern_from(pts, lower, upper), i_length, cfg);
        py::dict d;
        d["rho_L_hat"] = fit.rho_L_hat;
        d["sigma2_hat"] = fit.sigma2_hat;
        d["alpha_hat"] = fit.alpha_hat;
        d["contrast"] = fit.contrast_value;
        d["converged"] = fit.converged;
        return d;
      },
      py::arg("points"), py::arg("lower"), py::arg("upper"), py::arg("i_length"),
      py::arg("r_min") = 0.0, py::arg("r_max") = 0.0, py::arg("seed") = 1);

  m.def(
      "thomas_k_theoretical",
      [](double rho_L, double sigma2, const std::vector<double>& r) {
        std::vector<double> out;
        out.reserve(r.size());
        for (double x : r) out.push_back(thomas_k_theoretical(rho_L, sigma2, x));
        return py::array_t<double>(static_cast<py::ssize_t>(out.size()), out.data());
      },
      py::arg("rho_L"), py::arg("sigma2"), py::arg("r"));

  m.def(
      "pcf_theoretical",
      [](double rho_L, const std::vector<double>& mu, double kappa, double alpha,
         double sigma2, bool degenerate, const std::vector<double>& x) {
        const PlcppParams params = params_from(rho_L, mu, kappa, alpha, sigma2, degenerate);
        Vec lag = x.size() == 2 ? Vec(x[0], x[1]) : Vec(x[0], x[1], x[2]);
        return pcf_theoretical(params, lag);
      },
      py::arg("rho_L"), py::arg("mu"), py::arg("kappa"), py::arg("alpha"),
      py::arg("sigma2"), py::arg("degenerate"), py::arg("x"));

  m.def(
      "run_chain",
      [](const py::array_t<double>& pts, const std::vector<double>& lower,
         const std::vector<double>& upper, const py::dict& options,
         double ext_margin, std::uint64_t seed) {
        const PointPattern p = pattern_from(pts, lower, upper);
        BayesConfig cfg;
        auto get = [&](const char* key, double dflt) {
          return options.contains(key) ? options[key].cast<double>() : dflt;
        };
        cfg.alpha_shape = get("alpha_shape", cfg.alpha_shape);
        cfg.alpha_rate = get("alpha_rate", cfg.alpha_rate);
        cfg.rho_L_shape = get("rho_L_shape", cfg.rho_L_shape);
        cfg.rho_L_rate = get("rho_L_rate", cfg.rho_L_rate);
        cfg.kappa = get("kappa", cfg.kappa);
        cfg.kappa_fixed = !options.contains("kappa_free") ||
                          !options["kappa_free"].cast<bool>();
        cfg.sigma2_max = get("sigma2_max", cfg.sigma2_max);
        cfg.proposal_kappa0 = get("proposal_kappa0", cfg.proposal_kappa0);
        cfg.proposal_sd_sigma2 = get("proposal_sd_sigma2", cfg.proposal_sd_sigma2);
        cfg.mc_samples = static_cast<int>(get("mc_samples", cfg.mc_samples));
        cfg.iterations = static_cast<long long>(get("iterations", 2000));
        cfg.burn_in = static_cast<long long>(get("burn_in", 200));
        cfg.thin = static_cast<long long>(get("thin", 5));
        cfg.bdm_attempts = static_cast<int>(get("bdm_attempts", cfg.bdm_attempts));
        cfg.seed = seed;
        const McmcTrace trace = run_chain(p, cfg, p.window.inflated(ext_margin));
        py::dict d;
        const py::ssize_t n = static_cast<py::ssize_t>(trace.rows.size());
        py::array_t<double> rho(n), alpha(n), sigma2(n), phi(n), logp(n);
        py::array_t<long long> kk(n), iters(n);
        for (py::ssize_t i = 0; i < n; ++i) {
          const TraceRow& r = trace.rows[static_cast<std::size_t>(i)];
          rho.mutable_at(i) = r.rho_L;
          alpha.mutable_at(i) = r.alpha;
          sigma2.mutable_at(i) = r.sigma2;
          phi.mutable_at(i) = trace.dim == 2 ? UnitVector(r.mu).angle() : 0.0;
          logp.mutable_at(i) = r.log_post;
          kk.mutable_at(i) = r.k;
          iters.mutable_at(i) = r.iteration;
        }
        d["iteration"] = iters;
        d["rho_L"] = rho;
        d["alpha"] = alpha;
        d["sigma2"] = sigma2;
        d["phi"] = phi;
        d["log_post"] = logp;
        d["k"] = kk;
        return d;
      },
      py::arg("points"), py::arg("lower"), py::arg("upper"),
      py::arg("options") = py::dict(), py::arg("ext_margin") = 0.05, py::arg("seed") = 1,
      "Run the missing-data MCMC and return the trace as arrays.");

  m.attr("__version__") = "0.1.0";
}
