#include "cylk/plcpp.hpp"

#include <cmath>
#include <stdexcept>

#include "cylk/numeric.hpp"
#include "cylk/vmf.hpp"

namespace cylk {

PlcppParams::PlcppParams(double rho_L_, const UnitVector& mu_, double kappa_,
                         double alpha_, double sigma2_, bool degenerate_)
    : rho_L(rho_L_), mu(mu_), kappa(kappa_), alpha(alpha_), sigma2(sigma2_),
      degenerate(degenerate_) {
  if (!(rho_L > 0)) throw std::invalid_argument("PlcppParams: rho_L must be > 0");
  if (kappa < 0) throw std::invalid_argument("PlcppParams: kappa must be >= 0");
  if (!(alpha > 0)) throw std::invalid_argument("PlcppParams: alpha must be > 0");
  if (!(sigma2 > 0)) throw std::invalid_argument("PlcppParams: sigma2 must be > 0");
  if (degenerate && std::abs(std::abs(mu.last()) - 1.0) > 1e-12)
    throw std::invalid_argument("PlcppParams: degenerate rose requires mu = +-e_d");
}

namespace {

// integral over the circle of h(u) f(u | mu, kappa), split at the quadrant
// boundaries so |cos|/|sin| kinks stay off the quadrature panels
double circle_integral(const UnitVector& mu, double kappa,
                       const std::function<double(const UnitVector&)>& h, int order) {
  double total = 0.0;
  for (int q = 0; q < 4; ++q) {
    total += integrate(
        [&](double phi) {
          const UnitVector u = UnitVector::from_angle(phi);
          return h(u) * vmf_density(u, mu, kappa);
        },
        q * kPi / 2.0, (q + 1) * kPi / 2.0, order);
  }
  return total;
}

// integral over the sphere of h(u) f(u | mu, kappa) with the polar axis e_3;
// octant splitting isolates the |u_i| kinks
double sphere_integral(const UnitVector& mu, double kappa,
                       const std::function<double(const UnitVector&)>& h, int order) {
  const QuadRule& rule = gauss_legendre(order);
  double total = 0.0;
  for (int hem = 0; hem < 2; ++hem) {
    const double psi_lo = hem == 0 ? 0.0 : kPi / 2.0;
    for (int q = 0; q < 4; ++q) {
      const double az_lo = q * kPi / 2.0;
      double panel = 0.0;
      for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
        const double psi = psi_lo + kPi / 4.0 * (rule.nodes[a] + 1.0);
        const double sp = std::sin(psi);
        for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
          const double az = az_lo + kPi / 4.0 * (rule.nodes[b] + 1.0);
          const UnitVector u = UnitVector::normalized(
              Vec(sp * std::cos(az), sp * std::sin(az), std::cos(psi)));
          panel += rule.weights[a] * rule.weights[b] * h(u) *
                   vmf_density(u, mu, kappa) * sp;
        }
      }
      total += panel * (kPi / 4.0) * (kPi / 4.0);
    }
  }
  return total;
}

}  // namespace

double mean_abs_last(const UnitVector& mu, double kappa) {
  auto h = [](const UnitVector& u) { return std::abs(u.last()); };
  if (mu.dim() == 2) return circle_integral(mu, kappa, h, 64);
  return sphere_integral(mu, kappa, h, 48);
}

double beta_from_rose(const PlcppParams& params) {
  if (params.degenerate) return params.rho_L;
  return params.rho_L * mean_abs_last(params.mu, params.kappa);
}

double intensity_I(const UnitVector& mu, double kappa, bool degenerate,
                   const BoxWindow& w_ext) {
  const int d = mu.dim();
  if (w_ext.dim() != d) throw std::invalid_argument("intensity_I: dim mismatch");
  if (degenerate) {
    double shadow = 1.0;
    for (int i = 0; i < d - 1; ++i) shadow *= w_ext.side(i);
    return shadow;
  }
  // lambda(J_u) |u_d| = sum_i (prod_{j != i} a_j) |u_i|
  auto h = [&](const UnitVector& u) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      double prod = 1.0;
      for (int j = 0; j < d; ++j)
        if (j != i) prod *= w_ext.side(j);
      s += prod * std::abs(u[i]);
    }
    return s;
  };
  if (d == 2) return circle_integral(mu, kappa, h, 64);
  return sphere_integral(mu, kappa, h, 48);
}

double intensity_I(const PlcppParams& params, const BoxWindow& w_ext) {
  return intensity_I(params.mu, params.kappa, params.degenerate, w_ext);
}

Vec sample_uniform_anchor(const UnitVector& u, const BoxWindow& w_ext, RngStream& rng) {
  const int d = u.dim();
  const BoxWindow bbox = shadow_bbox(w_ext, u);
  for (;;) {
    Vec y = Vec::zero(d);
    for (int i = 0; i < d - 1; ++i) y[i] = rng.uniform(bbox.lower[i], bbox.upper[i]);
    if (d == 2) return y;
    if (line_hits_box(DirectedLine(y, u), w_ext)) return y;
  }
}

namespace {

double sup_weighted_shadow(const BoxWindow& w_ext) {
  // sup_u sum_i c_i |u_i| = ||c||_2 with c_i = prod_{j != i} a_j
  const int d = w_ext.dim();
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    double prod = 1.0;
    for (int j = 0; j < d; ++j)
      if (j != i) prod *= w_ext.side(j);
    s += prod * prod;
  }
  return std::sqrt(s);
}

}  // namespace

LineSample sample_line_process(const PlcppParams& params, const BoxWindow& w_ext,
                               RngStream& rng, LineProposal proposal) {
  const int d = params.dim();
  if (w_ext.dim() != d) throw std::invalid_argument("sample_line_process: dim mismatch");
  const double mean_count = params.rho_L * intensity_I(params, w_ext);
  const long long n_lines = rng.poisson(mean_count);
  LineSample out;
  out.lines.reserve(static_cast<std::size_t>(n_lines));

  if (params.degenerate) {
    const UnitVector e_d = UnitVector::axis(d, d - 1);
    for (long long i = 0; i < n_lines; ++i) {
      Vec y = Vec::zero(d);
      for (int a = 0; a < d - 1; ++a) y[a] = rng.uniform(w_ext.lower[a], w_ext.upper[a]);
      out.lines.emplace_back(y, e_d);
    }
    return out;
  }

  const double sup = sup_weighted_shadow(w_ext);
  for (long long i = 0; i < n_lines; ++i) {
    for (;;) {
      const UnitVector u = sample_vmf(params.mu, params.kappa, rng);
      if (u.last() == 0.0) continue;  // measure zero, but keep the invariant
      const Vec y = sample_uniform_anchor(u, w_ext, rng);
      double accept;
      if (proposal == LineProposal::Exact) {
        accept = std::abs(u.last()) * lateral_measure(u, w_ext) / sup;
      } else {
        accept = std::abs(u.last());
      }
      if (rng.uniform() < accept) {
        out.lines.emplace_back(y, u);
        break;
      }
    }
  }
  return out;
}

LatentRealization simulate(const PlcppParams& params, const BoxWindow& w,
                           const BoxWindow& w_ext, RngStream& rng, bool keep_latent,
                           LineProposal proposal) {
  const int d = params.dim();
  if (w.dim() != d || w_ext.dim() != d)
    throw std::invalid_argument("simulate: dim mismatch");
  for (int i = 0; i < d; ++i)
    if (w.lower[i] < w_ext.lower[i] || w.upper[i] > w_ext.upper[i])
      throw std::invalid_argument("simulate: w must be contained in w_ext");

  const LineSample ls = sample_line_process(params, w_ext, rng, proposal);
  const double sigma = std::sqrt(params.sigma2);

  LatentRealization lat{ls.lines, {}, {}, PointPattern({}, w)};
  std::vector<Vec> kept;
  for (const DirectedLine& line : ls.lines) {
    const auto [s0, s1] = support_interval(line, w);
    const double len = s1 - s0;
    const long long n_parents = rng.poisson(params.alpha * len);
    const Rotation rot = rotation_to(line.direction);
    std::vector<Vec> parents, displaced;
    for (long long k = 0; k < n_parents; ++k) {
      const double s = rng.uniform(s0, s1);
      const Vec q = line.point_at(s);
      Vec local = Vec::zero(d);
      for (int a = 0; a < d - 1; ++a) local[a] = sigma * rng.normal();
      const Vec x = q + rot.apply(local);
      if (keep_latent) {
        parents.push_back(q);
        displaced.push_back(x);
      }
      if (w.contains(x)) kept.push_back(x);
    }
    if (keep_latent) {
      lat.parents.push_back(std::move(parents));
      lat.displaced.push_back(std::move(displaced));
    }
  }
  if (!keep_latent) lat.lines.clear();
  lat.pattern = PointPattern(std::move(kept), w);
  return lat;
}

double pcf_theoretical(const PlcppParams& params, const Vec& x) {
  const int d = params.dim();
  if (x.dim != d) throw std::invalid_argument("pcf_theoretical: dim mismatch");
  const double norm = std::pow(4.0 * kPi * params.sigma2, -(d - 1) / 2.0);
  auto kernel_conv = [&](const UnitVector& u) {
    const double s = x.dot(u.vec());
    const double lat2 = std::max(0.0, x.norm2() - s * s);
    return std::exp(-lat2 / (4.0 * params.sigma2)) * norm;
  };
  if (params.degenerate) {
    const UnitVector e_d = UnitVector::axis(d, d - 1);
    return 1.0 + kernel_conv(e_d) / params.rho_L;
  }
  double integral;
  if (d == 2) {
    integral = circle_integral(params.mu, params.kappa, kernel_conv, 96);
  } else {
    // mu-aligned parametrization; the integrand is smooth on the sphere
    const Rotation rot = rotation_to(params.mu);
    const QuadRule& rule = gauss_legendre(64);
    integral = 0.0;
    for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
      const double psi = kPi / 2.0 * (rule.nodes[a] + 1.0);
      const double sp = std::sin(psi);
      const double fpsi =
          std::exp(vmf_log_norm_const(3, params.kappa) + params.kappa * std::cos(psi));
      double az_sum = 0.0;
      for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
        const double az = kPi * (rule.nodes[b] + 1.0);
        const UnitVector u = UnitVector::normalized(
            rot.apply(Vec(sp * std::cos(az), sp * std::sin(az), std::cos(psi))));
        az_sum += rule.weights[b] * kernel_conv(u);
      }
      integral += rule.weights[a] * fpsi * sp * az_sum * (kPi / 2.0) * kPi;
    }
  }
  return 1.0 + integral / params.rho_L;
}

double intensity_theoretical(const PlcppParams& params) {
  return params.alpha * params.rho_L;
}

double line_length_in(const LineSample& lines, const BoxWindow& region) {
  double total = 0.0;
  for (const DirectedLine& l : lines.lines) {
    const auto iv = clip_line_params(l, region);
    if (iv) total += iv->second - iv->first;
  }
  return total;
}

BoxWindow default_extended_window(const PlcppParams& params, const BoxWindow& w,
                                  double factor) {
  return w.inflated(factor * std::sqrt(params.sigma2));
}

}  // namespace cylk
