#include "cylk/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "cylk/numeric.hpp"
#include "cylk/summaries.hpp"
#include "cylk/vmf.hpp"

namespace cylk {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double log_gamma_pdf(double x, double shape, double rate) {
  if (!(x > 0)) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) -
         rate * x;
}

inline double gaussian_norm(const int d, double sigma2) {
  // (2 pi sigma2)^{-(d-1)/2}
  return d == 2 ? 1.0 / std::sqrt(2.0 * kPi * sigma2) : 1.0 / (2.0 * kPi * sigma2);
}

bool accept_log_ratio(double log_r, RngStream& rng) {
  if (std::isnan(log_r)) return false;
  if (log_r >= 0.0) return true;
  return std::log(rng.uniform()) < log_r;
}

}  // namespace

void BayesConfig::validate() const {
  if (!(alpha_shape > 0) || !(alpha_rate > 0) || !(rho_L_shape > 0) || !(rho_L_rate > 0))
    throw ConfigError("bayes: gamma prior parameters must be > 0");
  if (kappa < 0) throw ConfigError("bayes: kappa must be >= 0");
  if (!(kappa_max > 0)) throw ConfigError("bayes: kappa_max must be > 0");
  if (sigma2_max < 0) throw ConfigError("bayes: sigma2_max must be >= 0");
  if (!(proposal_kappa0 > 0) || !(proposal_sd_kappa > 0) || proposal_sd_sigma2 < 0)
    throw ConfigError("bayes: proposal tunings must be > 0");
  if (iterations <= 0 || burn_in < 0 || burn_in >= iterations)
    throw ConfigError("bayes: need 0 <= burn_in < iterations");
  if (thin < 1) throw ConfigError("bayes: thin must be >= 1");
  if (bdm_attempts < 0) throw ConfigError("bayes: bdm_attempts must be >= 0");
  if (mc_samples < 1) throw ConfigError("bayes: mc_samples must be >= 1");
  if (store_line_samples < 0) throw ConfigError("bayes: store_line_samples must be >= 0");
}

McEstimate window_kernel_integral(const DirectedLine& line, double sigma2,
                                  const BoxWindow& w, int mc_n, RngStream& rng) {
  if (mc_n < 1) throw std::invalid_argument("window_kernel_integral: mc_n must be >= 1");
  const int d = w.dim();
  const auto [s0, s1] = support_interval(line, w);
  const double len = s1 - s0;
  const Rotation rot = rotation_to(line.direction);
  const double sigma = std::sqrt(sigma2);
  long long hits = 0;
  for (int k = 0; k < mc_n; ++k) {
    const double s = s0 + len * (static_cast<double>(k) + rng.uniform()) / mc_n;
    Vec x = line.point_at(s);
    for (int a = 0; a < d - 1; ++a) {
      const double g = sigma * rng.normal();
      const Vec col = rot.column(a);
      x = x + col * g;
    }
    if (w.contains(x)) ++hits;
  }
  const double p = static_cast<double>(hits) / mc_n;
  McEstimate est;
  est.value = len * p;
  est.std_error = len * std::sqrt(std::max(0.0, p * (1.0 - p) / mc_n));
  return est;
}

double window_kernel_integral_quad(const DirectedLine& line, double sigma2,
                                   const BoxWindow& w, int n_nodes) {
  const int d = w.dim();
  const auto [s0, s1] = support_interval(line, w);
  const Rotation rot = rotation_to(line.direction);
  const double sigma = std::sqrt(sigma2);
  if (d == 2) {
    // exact in the lateral coordinate: Gaussian mass of the clipped segment
    const Vec v = rot.column(0);
    auto mass = [&](double s) {
      const Vec base = line.point_at(s);
      double lo = -std::numeric_limits<double>::infinity(), hi = -lo;
      for (int i = 0; i < 2; ++i) {
        if (v[i] == 0.0) {
          if (base[i] < w.lower[i] || base[i] > w.upper[i]) return 0.0;
          continue;
        }
        double a = (w.lower[i] - base[i]) / v[i];
        double b = (w.upper[i] - base[i]) / v[i];
        if (a > b) std::swap(a, b);
        lo = std::max(lo, a);
        hi = std::min(hi, b);
      }
      if (!(hi > lo)) return 0.0;
      return normal_cdf(hi / sigma) - normal_cdf(lo / sigma);
    };
    return integrate(mass, s0, s1, n_nodes);
  }
  // d == 3: product rule over the lateral plane with an indicator
  const Vec v1 = rot.column(0), v2 = rot.column(1);
  const QuadRule& lat = gauss_legendre(32);
  const double span = 6.0 * sigma;
  auto mass = [&](double s) {
    const Vec base = line.point_at(s);
    double acc = 0.0;
    for (std::size_t a = 0; a < lat.nodes.size(); ++a) {
      const double w1 = span * lat.nodes[a];
      for (std::size_t b = 0; b < lat.nodes.size(); ++b) {
        const double w2 = span * lat.nodes[b];
        const Vec x = base + v1 * w1 + v2 * w2;
        if (!w.contains(x)) continue;
        acc += lat.weights[a] * lat.weights[b] *
               std::exp(-(w1 * w1 + w2 * w2) / (2.0 * sigma2));
      }
    }
    return acc * span * span / (2.0 * kPi * sigma2);
  };
  return integrate(mass, s0, s1, n_nodes);
}

Sampler::Sampler(const PointPattern& data, const BayesConfig& config,
                 const BoxWindow& w_ext)
    : data_(data), cfg_(config), w_(data.window), w_ext_(w_ext) {
  cfg_.validate();
  if (w_ext_.dim() != w_.dim()) throw ConfigError("bayes: w_ext dimension mismatch");
  for (int i = 0; i < w_.dim(); ++i)
    if (w_.lower[i] < w_ext_.lower[i] || w_.upper[i] > w_ext_.upper[i])
      throw ConfigError("bayes: w_ext must contain the data window");
  if (data_.size() < 1 && !cfg_.no_data_mode)
    throw DataError("bayes: empty pattern (use no_data_mode for prior checks)");
  sigma2_max_ = cfg_.sigma2_max > 0 ? cfg_.sigma2_max
                                    : std::pow(w_.diameter() / 4.0, 2);
}

double Sampler::kernel_value(const Vec& x, const DirectedLine& line,
                             double sigma2) const {
  const Vec diff = x - line.anchor;
  const double s = diff.dot(line.direction.vec());
  const double lat2 = std::max(0.0, diff.norm2() - s * s);
  return gaussian_norm(w_.dim(), sigma2) * std::exp(-lat2 / (2.0 * sigma2));
}

double Sampler::line_integral(const DirectedLine& line, std::uint64_t id,
                              double sigma2) const {
  if (cfg_.integral_mode == IntegralMode::Quadrature)
    return window_kernel_integral_quad(line, sigma2, w_);
  RngStream aux = RngStream(cfg_.seed, 0x57A7u).substream(sweep_key_).substream(id);
  return window_kernel_integral(line, sigma2, w_, cfg_.mc_samples, aux).value;
}

double Sampler::sum_kernels(std::size_t i) const {
  double s = 0.0;
  for (const LineState& l : state_.lines) s += l.kernel[i];
  return s;
}

void Sampler::refresh_line_caches() {
  for (LineState& l : state_.lines) {
    l.kernel.resize(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i)
      l.kernel[i] = kernel_value(data_.points[i], l.line, state_.sigma2);
    l.c_integral = cfg_.no_data_mode ? 0.0
                                     : line_integral(l.line, l.id, state_.sigma2);
  }
}

void Sampler::begin_sweep(long long sweep) {
  sweep_key_ = mix64(static_cast<std::uint64_t>(sweep) + 1);
  if (!cfg_.no_data_mode) {
    for (LineState& l : state_.lines)
      l.c_integral = line_integral(l.line, l.id, state_.sigma2);
  }
}

void Sampler::load_state(const McmcState& s) {
  if (s.lines.empty()) throw std::invalid_argument("bayes: state needs k >= 1 lines");
  state_ = s;
  if (sigma2_step_ <= 0.0)
    sigma2_step_ = cfg_.proposal_sd_sigma2 > 0 ? cfg_.proposal_sd_sigma2
                                               : 0.25 * state_.sigma2;
  next_line_id_ = 0;
  for (LineState& l : state_.lines) l.id = next_line_id_++;
  intensity_i_ = intensity_I(UnitVector(state_.mu), state_.kappa, false, w_ext_);
  refresh_line_caches();
}

void Sampler::init() {
  McmcState s;
  const int d = w_.dim();
  s.sigma2 = cfg_.init_sigma2 > 0 ? cfg_.init_sigma2
                                  : std::min(std::pow(0.05 * w_.min_side(), 2),
                                             0.5 * sigma2_max_);
  s.kappa = std::min(cfg_.kappa, cfg_.kappa_max);
  if (cfg_.init_mu) {
    s.mu = *cfg_.init_mu;
  } else if (!cfg_.no_data_mode && d == 2 && data_.size() >= 8) {
    // coarse directional scan picks the initial orientation
    std::vector<double> phis;
    for (int i = 0; i < 36; ++i) phis.push_back((i + 0.5) * kPi / 36.0);
    const SummaryCurve scan = directional_scan(
        data_, phis, 0.1 * w_.min_side(), 0.3 * w_.min_side());
    const std::size_t best =
        static_cast<std::size_t>(std::max_element(scan.values.begin(), scan.values.end()) -
                                 scan.values.begin());
    s.mu = UnitVector::from_angle(phis[best]).vec();
  } else {
    s.mu = UnitVector::axis(d, d - 1).vec();
  }
  s.rho_L = cfg_.init_rho_L > 0
                ? cfg_.init_rho_L
                : std::clamp(cfg_.rho_L_shape / cfg_.rho_L_rate, 0.1, 1e4);
  s.alpha = cfg_.init_alpha > 0
                ? cfg_.init_alpha
                : std::clamp(cfg_.alpha_shape / cfg_.alpha_rate, 0.1, 1e4);

  const UnitVector mu0(s.mu);
  const double intensity = intensity_I(mu0, s.kappa, false, w_ext_);
  const long long want = std::llround(s.rho_L * intensity);
  const std::size_t k0 = static_cast<std::size_t>(
      std::clamp<long long>(want, 1, std::max<long long>(1, static_cast<long long>(data_.size()))));

  std::vector<DirectedLine> lines;
  if (data_.size() > 0) {
    // densest points first, skipping anchors laterally close to a taken one
    std::vector<double> nn(data_.size(), 0.0);
    for (std::size_t i = 0; i < data_.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < data_.size(); ++j)
        if (j != i) best = std::min(best, (data_.points[j] - data_.points[i]).norm2());
      nn[i] = best;
    }
    std::vector<std::size_t> order(data_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (nn[a] != nn[b]) return nn[a] < nn[b];
      return a < b;
    });
    const double spacing = 2.0 * std::sqrt(s.sigma2);
    for (int pass = 0; pass < 2 && lines.size() < k0; ++pass) {
      for (std::size_t idx : order) {
        if (lines.size() >= k0) break;
        const DirectedLine cand = line_through(data_.points[idx], mu0);
        bool close = false;
        if (pass == 0) {
          for (const DirectedLine& l : lines) {
            const Vec dy = project_complement(cand.anchor - l.anchor, mu0);
            if (dy.norm() < spacing) {
              close = true;
              break;
            }
          }
        }
        if (!close && line_hits_box(cand, w_ext_)) lines.push_back(cand);
      }
    }
  }
  while (lines.size() < k0) {
    // spread anchors across the shadow of the extended window
    const BoxWindow bbox = shadow_bbox(w_ext_, mu0);
    Vec y = Vec::zero(d);
    const double t = (static_cast<double>(lines.size()) + 0.5) / static_cast<double>(k0);
    for (int a = 0; a < d - 1; ++a)
      y[a] = bbox.lower[a] + t * (bbox.upper[a] - bbox.lower[a]);
    DirectedLine cand(y, mu0);
    if (!line_hits_box(cand, w_ext_)) cand = line_through(w_.center(), mu0);
    lines.push_back(cand);
  }
  for (const DirectedLine& l : lines) s.lines.push_back({l, 0, 0.0, {}});
  load_state(s);
}

void Sampler::gibbs_update_alpha(RngStream& rng) {
  double rate = cfg_.alpha_rate;
  double shape = cfg_.alpha_shape;
  if (!cfg_.no_data_mode) {
    shape += static_cast<double>(data_.size());
    for (const LineState& l : state_.lines) rate += l.c_integral;
  }
  state_.alpha = rng.gamma(shape, rate);
}

void Sampler::gibbs_update_rho_L(RngStream& rng) {
  const double shape = cfg_.rho_L_shape + static_cast<double>(state_.k());
  const double rate = cfg_.rho_L_rate + intensity_i_;
  state_.rho_L = rng.gamma(shape, rate);
}

double Sampler::log_mu_ratio(const UnitVector& mu_prop, double& i_prop) const {
  const UnitVector mu(state_.mu);
  i_prop = intensity_I(mu_prop, state_.kappa, false, w_ext_);
  double log_r = state_.rho_L * (intensity_i_ - i_prop);
  for (const LineState& l : state_.lines) {
    log_r += vmf_log_density(l.line.direction, mu_prop, state_.kappa) -
             vmf_log_density(l.line.direction, mu, state_.kappa);
  }
  return log_r;
}

bool Sampler::mh_update_mu(RngStream& rng) {
  const UnitVector mu_prop = sample_vmf(UnitVector(state_.mu), cfg_.proposal_kappa0, rng);
  double i_prop = 0.0;
  const double log_r = log_mu_ratio(mu_prop, i_prop);
  if (accept_log_ratio(log_r, rng)) {
    state_.mu = mu_prop.vec();
    intensity_i_ = i_prop;
    return true;
  }
  return false;
}

double Sampler::log_kappa_ratio(double kappa_prop, double& i_prop) const {
  if (kappa_prop <= 0.0 || kappa_prop > cfg_.kappa_max) return kNegInf;
  const UnitVector mu(state_.mu);
  i_prop = intensity_I(mu, kappa_prop, false, w_ext_);
  double log_r = state_.rho_L * (intensity_i_ - i_prop);
  for (const LineState& l : state_.lines) {
    log_r += vmf_log_density(l.line.direction, mu, kappa_prop) -
             vmf_log_density(l.line.direction, mu, state_.kappa);
  }
  return log_r;
}

bool Sampler::mh_update_kappa(RngStream& rng) {
  const double kappa_prop = rng.normal(state_.kappa, cfg_.proposal_sd_kappa);
  double i_prop = 0.0;
  const double log_r = log_kappa_ratio(kappa_prop, i_prop);
  if (accept_log_ratio(log_r, rng)) {
    state_.kappa = kappa_prop;
    intensity_i_ = i_prop;
    return true;
  }
  return false;
}

double Sampler::log_sigma2_ratio(double sigma2_prop) const {
  if (sigma2_prop <= 0.0 || sigma2_prop > sigma2_max_) return kNegInf;
  if (cfg_.no_data_mode) return 0.0;  // flat prior, likelihood dropped
  // coupled integrals: same per-line auxiliary stream for both variances
  double log_r = 0.0;
  std::vector<double> kernel_prop(data_.size(), 0.0);
  for (const LineState& l : state_.lines) {
    const double c_prop = line_integral(l.line, l.id, sigma2_prop);
    log_r += state_.alpha * (l.c_integral - c_prop);
    for (std::size_t i = 0; i < data_.size(); ++i)
      kernel_prop[i] += kernel_value(data_.points[i], l.line, sigma2_prop);
  }
  for (std::size_t i = 0; i < data_.size(); ++i)
    log_r += std::log(kernel_prop[i]) - std::log(sum_kernels(i));
  return log_r;
}

bool Sampler::mh_update_sigma2(RngStream& rng) {
  // fixed step size: a state-dependent scale would make the walk asymmetric
  const double prop = rng.normal(state_.sigma2, sigma2_step_);
  const double log_r = log_sigma2_ratio(prop);
  if (accept_log_ratio(log_r, rng)) {
    state_.sigma2 = prop;
    for (LineState& l : state_.lines) {
      if (!cfg_.no_data_mode) l.c_integral = line_integral(l.line, l.id, prop);
      for (std::size_t i = 0; i < data_.size(); ++i)
        l.kernel[i] = kernel_value(data_.points[i], l.line, prop);
    }
    return true;
  }
  return false;
}

Sampler::LineContrib Sampler::make_contrib(const DirectedLine& line) const {
  LineContrib z{line, 0.0, {}};
  if (!cfg_.no_data_mode)
    z.c_integral = line_integral(line, next_line_id_, state_.sigma2);
  z.kernel.resize(data_.size());
  for (std::size_t i = 0; i < data_.size(); ++i)
    z.kernel[i] = kernel_value(data_.points[i], line, state_.sigma2);
  return z;
}

double Sampler::log_birth_ratio(const LineContrib& z) const {
  if (!line_hits_box(z.line, w_ext_)) return kNegInf;
  const double k1 = static_cast<double>(state_.k()) + 1.0;
  double log_r = std::log(state_.rho_L) +
                 std::log(lateral_measure(z.line.direction, w_ext_)) +
                 std::log(std::abs(z.line.direction.last())) - std::log(k1);
  if (cfg_.no_data_mode) return log_r;
  log_r -= state_.alpha * z.c_integral;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const double s_i = sum_kernels(i);
    const double add = z.kernel[i];
    log_r += std::log1p(add == 0.0 ? 0.0 : add / s_i);
  }
  return log_r;
}

double Sampler::log_death_ratio(std::size_t j) const {
  const LineState& del = state_.lines[j];
  const double k1 = static_cast<double>(state_.k() - 1) + 1.0;
  double log_rb = std::log(state_.rho_L) +
                  std::log(lateral_measure(del.line.direction, w_ext_)) +
                  std::log(std::abs(del.line.direction.last())) - std::log(k1);
  if (!cfg_.no_data_mode) {
    log_rb -= state_.alpha * del.c_integral;
    for (std::size_t i = 0; i < data_.size(); ++i) {
      double s_minus = 0.0;
      for (std::size_t jj = 0; jj < state_.k(); ++jj)
        if (jj != j) s_minus += state_.lines[jj].kernel[i];
      const double add = del.kernel[i];
      log_rb += std::log1p(add == 0.0 ? 0.0 : add / s_minus);
    }
  }
  return -log_rb;
}

double Sampler::log_move_ratio(std::size_t j, const LineContrib& z) const {
  if (!line_hits_box(z.line, w_ext_)) return kNegInf;
  const LineState& del = state_.lines[j];
  double log_r = std::log(lateral_measure(z.line.direction, w_ext_)) +
                 std::log(std::abs(z.line.direction.last())) -
                 std::log(lateral_measure(del.line.direction, w_ext_)) -
                 std::log(std::abs(del.line.direction.last()));
  if (cfg_.no_data_mode) return log_r;
  log_r += state_.alpha * (del.c_integral - z.c_integral);
  for (std::size_t i = 0; i < data_.size(); ++i) {
    double s_minus = 0.0;
    for (std::size_t jj = 0; jj < state_.k(); ++jj)
      if (jj != j) s_minus += state_.lines[jj].kernel[i];
    const double add_new = z.kernel[i];
    const double add_old = del.kernel[i];
    if (s_minus == 0.0) {
      // the moved line is the only mass at datum i
      log_r += std::log(add_new) - std::log(add_old);
    } else {
      log_r += std::log1p(add_new == 0.0 ? 0.0 : add_new / s_minus) -
               std::log1p(add_old == 0.0 ? 0.0 : add_old / s_minus);
    }
  }
  return log_r;
}

void Sampler::accept_birth(const LineContrib& z) {
  state_.lines.push_back({z.line, next_line_id_++, z.c_integral, z.kernel});
}

void Sampler::accept_death(std::size_t j) {
  // the data case keeps k >= 1; the prior-only mode may empty the state so
  // the chain targets the untruncated prior
  if (state_.k() <= 1 && !cfg_.no_data_mode)
    throw std::invalid_argument("bayes: death would empty the state");
  state_.lines.erase(state_.lines.begin() + static_cast<std::ptrdiff_t>(j));
}

void Sampler::accept_move(std::size_t j, const LineContrib& z) {
  state_.lines[j] = {z.line, next_line_id_++, z.c_integral, z.kernel};
}

int Sampler::birth_death_move(RngStream& rng) {
  const double pick = rng.uniform();
  const UnitVector mu(state_.mu);
  if (pick < 1.0 / 3.0) {
    const UnitVector u = sample_vmf(mu, state_.kappa, rng);
    const Vec y = sample_uniform_anchor(u, w_ext_, rng);
    const LineContrib z = make_contrib(DirectedLine(y, u));
    if (accept_log_ratio(log_birth_ratio(z), rng)) {
      accept_birth(z);
      return 1;
    }
    return -1;
  }
  if (pick < 2.0 / 3.0) {
    const bool at_floor = cfg_.no_data_mode ? state_.k() == 0 : state_.k() == 1;
    if (at_floor) return 0;  // null move by definition
    const std::size_t j = rng.uniform_index(state_.k());
    if (accept_log_ratio(log_death_ratio(j), rng)) {
      accept_death(j);
      return 2;
    }
    return -2;
  }
  if (state_.k() == 0) return 0;  // nothing to move (prior-only mode)
  const std::size_t j = rng.uniform_index(state_.k());
  const UnitVector u = sample_vmf(mu, state_.kappa, rng);
  const Vec y = sample_uniform_anchor(u, w_ext_, rng);
  const LineContrib z = make_contrib(DirectedLine(y, u));
  if (accept_log_ratio(log_move_ratio(j, z), rng)) {
    accept_move(j, z);
    return 3;
  }
  return -3;
}

double Sampler::log_prior(double rho_L, double kappa, double alpha,
                          double sigma2) const {
  double lp = log_gamma_pdf(alpha, cfg_.alpha_shape, cfg_.alpha_rate) +
              log_gamma_pdf(rho_L, cfg_.rho_L_shape, cfg_.rho_L_rate);
  lp -= w_.dim() == 2 ? std::log(2.0 * kPi) : std::log(4.0 * kPi);  // uniform mu
  if (!(sigma2 > 0) || sigma2 > sigma2_max_) return kNegInf;
  lp -= std::log(sigma2_max_);
  if (!cfg_.kappa_fixed) {
    if (!(kappa > 0) || kappa > cfg_.kappa_max) return kNegInf;
    lp -= std::log(cfg_.kappa_max);
  }
  return lp;
}

double Sampler::log_unnormalized_posterior() const {
  const UnitVector mu(state_.mu);
  double lp = log_prior(state_.rho_L, state_.kappa, state_.alpha, state_.sigma2);
  lp -= state_.rho_L * intensity_i_;
  for (const LineState& l : state_.lines) {
    if (!line_hits_box(l.line, w_ext_)) return kNegInf;
    lp += std::log(state_.rho_L) + std::log(std::abs(l.line.direction.last())) +
          vmf_log_density(l.line.direction, mu, state_.kappa);
  }
  if (!cfg_.no_data_mode) {
    double c_sum = 0.0;
    for (const LineState& l : state_.lines) c_sum += l.c_integral;
    lp += w_.volume() - state_.alpha * c_sum;
    for (std::size_t i = 0; i < data_.size(); ++i) {
      const double s_i = sum_kernels(i);
      if (!(s_i > 0)) return kNegInf;  // datum unreachable under current lines
      lp += std::log(state_.alpha * s_i);
    }
  }
  return lp;
}

McmcTrace run_chain(const PointPattern& data, const BayesConfig& config,
                    const BoxWindow& w_ext) {
  config.validate();
  Sampler smp(data, config, w_ext);
  smp.init();
  RngStream rng(config.seed, 1);

  McmcTrace trace;
  trace.dim = data.window.dim();

  // equally spaced snapshot schedule over the post burn-in stretch
  std::vector<long long> snapshots;
  if (config.store_line_samples > 0) {
    const long long post = config.iterations - config.burn_in;
    for (int j = 1; j <= config.store_line_samples; ++j)
      snapshots.push_back(config.burn_in +
                          (static_cast<long long>(j) * post) / config.store_line_samples - 1);
  }
  std::size_t snap_at = 0;

  for (long long iter = 0; iter < config.iterations; ++iter) {
    smp.begin_sweep(iter);
    smp.gibbs_update_alpha(rng);
    smp.gibbs_update_rho_L(rng);
    ++trace.prop_mu;
    trace.acc_mu += smp.mh_update_mu(rng) ? 1 : 0;
    if (!config.kappa_fixed) {
      ++trace.prop_kappa;
      trace.acc_kappa += smp.mh_update_kappa(rng) ? 1 : 0;
    }
    ++trace.prop_sigma2;
    trace.acc_sigma2 += smp.mh_update_sigma2(rng) ? 1 : 0;
    for (int a = 0; a < config.bdm_attempts; ++a) {
      switch (smp.birth_death_move(rng)) {
        case 1: ++trace.prop_birth; ++trace.acc_birth; break;
        case -1: ++trace.prop_birth; break;
        case 2: ++trace.prop_death; ++trace.acc_death; break;
        case -2: ++trace.prop_death; break;
        case 0: ++trace.prop_death; ++trace.null_death; break;
        case 3: ++trace.prop_move; ++trace.acc_move; break;
        case -3: ++trace.prop_move; break;
      }
    }
    if (iter >= config.burn_in && (iter - config.burn_in) % config.thin == 0) {
      TraceRow row;
      row.iteration = iter;
      row.rho_L = smp.state().rho_L;
      row.mu = smp.state().mu;
      row.kappa = smp.state().kappa;
      row.alpha = smp.state().alpha;
      row.sigma2 = smp.state().sigma2;
      row.k = static_cast<int>(smp.state().k());
      row.log_post = smp.log_unnormalized_posterior();
      if (std::isnan(row.log_post))
        throw NumericError("bayes: NaN log posterior at iteration " +
                           std::to_string(iter));
      trace.rows.push_back(row);
    }
    while (snap_at < snapshots.size() && snapshots[snap_at] == iter) {
      LineSample ls;
      for (const LineState& l : smp.state().lines) ls.lines.push_back(l.line);
      trace.line_samples.push_back(std::move(ls));
      ++snap_at;
    }
  }
  return trace;
}

void write_trace_csv(const McmcTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write trace file: " + path);
  if (trace.dim == 2)
    out << "iteration,rho_L,phi,kappa,alpha,sigma2,k,log_post\n";
  else
    out << "iteration,rho_L,mu_x,mu_y,mu_z,kappa,alpha,sigma2,k,log_post\n";
  for (const TraceRow& r : trace.rows) {
    out << r.iteration << "," << fmt17(r.rho_L) << ",";
    if (trace.dim == 2) {
      out << fmt17(UnitVector(r.mu).angle()) << ",";
    } else {
      out << fmt17(r.mu[0]) << "," << fmt17(r.mu[1]) << "," << fmt17(r.mu[2]) << ",";
    }
    out << fmt17(r.kappa) << "," << fmt17(r.alpha) << "," << fmt17(r.sigma2) << ","
        << r.k << "," << fmt17(r.log_post) << "\n";
  }
}

std::vector<double> line_density_raster(const std::vector<LineSample>& samples,
                                        const BoxWindow& w, int nx, int ny) {
  if (w.dim() != 2) throw std::invalid_argument("line_density_raster: requires d = 2");
  if (nx < 1 || ny < 1) throw std::invalid_argument("line_density_raster: bad resolution");
  if (samples.empty())
    throw DataError("line_density_raster: need at least one line sample");
  std::vector<double> acc(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), 0.0);
  std::vector<char> hit(acc.size());
  const double dx = w.side(0) / nx;
  const double dy = w.side(1) / ny;
  for (const LineSample& sample : samples) {
    std::fill(hit.begin(), hit.end(), 0);
    for (const DirectedLine& l : sample.lines) {
      const auto clip = clip_line_params(l, w);
      if (!clip) continue;
      const double uy = l.direction[1];  // nonzero by the phase representation
      for (int iy = 0; iy < ny; ++iy) {
        const double ylo = w.lower[1] + iy * dy;
        const double yhi = ylo + dy;
        double s0 = (ylo - l.anchor[1]) / uy;
        double s1 = (yhi - l.anchor[1]) / uy;
        if (s0 > s1) std::swap(s0, s1);
        s0 = std::max(s0, clip->first);
        s1 = std::min(s1, clip->second);
        if (s0 > s1) continue;
        const double xa = l.anchor[0] + s0 * l.direction[0];
        const double xb = l.anchor[0] + s1 * l.direction[0];
        int ix0 = static_cast<int>(std::floor((std::min(xa, xb) - w.lower[0]) / dx));
        int ix1 = static_cast<int>(std::floor((std::max(xa, xb) - w.lower[0]) / dx));
        ix0 = std::clamp(ix0, 0, nx - 1);
        ix1 = std::clamp(ix1, 0, nx - 1);
        for (int ix = ix0; ix <= ix1; ++ix)
          hit[static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx) +
              static_cast<std::size_t>(ix)] = 1;
      }
    }
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += hit[i];
  }
  for (double& v : acc) v /= static_cast<double>(samples.size());
  return acc;
}

void write_raster_csv(const std::vector<double>& grid, int nx, int ny,
                      const std::string& path) {
  if (grid.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny))
    throw std::invalid_argument("write_raster_csv: size mismatch");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write raster file: " + path);
  out << "# rows bottom-to-top, columns left-to-right\n";
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      out << (ix ? "," : "")
          << fmt17(grid[static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx) +
                        static_cast<std::size_t>(ix)]);
    }
    out << "\n";
  }
}

void write_line_samples_json(const std::vector<LineSample>& samples,
                             const BoxWindow& w, const std::string& path) {
  nlohmann::json j;
  j["window"]["dim"] = w.dim();
  for (int i = 0; i < w.dim(); ++i) {
    j["window"]["lower"].push_back(w.lower[i]);
    j["window"]["upper"].push_back(w.upper[i]);
  }
  j["samples"] = nlohmann::json::array();
  for (const LineSample& s : samples) {
    nlohmann::json arr = nlohmann::json::array();
    for (const DirectedLine& l : s.lines) {
      nlohmann::json e;
      for (int i = 0; i < w.dim(); ++i) {
        e["y"].push_back(l.anchor[i]);
        e["u"].push_back(l.direction[i]);
      }
      arr.push_back(e);
    }
    j["samples"].push_back(arr);
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write line samples file: " + path);
  out << j.dump() << "\n";
}

std::pair<std::vector<LineSample>, BoxWindow> read_line_samples_json(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open line samples file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw DataError(path + ": " + std::string(e.what()));
  }
  const int dim = j.at("window").at("dim").get<int>();
  Vec lo = Vec::zero(dim), hi = Vec::zero(dim);
  for (int i = 0; i < dim; ++i) {
    lo[i] = j["window"]["lower"].at(static_cast<std::size_t>(i)).get<double>();
    hi[i] = j["window"]["upper"].at(static_cast<std::size_t>(i)).get<double>();
  }
  std::vector<LineSample> samples;
  for (const auto& arr : j.at("samples")) {
    LineSample s;
    for (const auto& e : arr) {
      Vec y = Vec::zero(dim), u = Vec::zero(dim);
      for (int i = 0; i < dim; ++i) {
        y[i] = e.at("y").at(static_cast<std::size_t>(i)).get<double>();
        u[i] = e.at("u").at(static_cast<std::size_t>(i)).get<double>();
      }
      s.lines.emplace_back(y, UnitVector::normalized(u));
    }
    samples.push_back(std::move(s));
  }
  return {std::move(samples), BoxWindow(lo, hi)};
}

void write_raster_pgm(const std::vector<double>& grid, int nx, int ny,
                      const std::string& path) {
  if (grid.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny))
    throw std::invalid_argument("write_raster_pgm: size mismatch");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write raster file: " + path);
  out << "P2\n" << nx << " " << ny << "\n255\n";
  for (int iy = ny - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const double v = grid[static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx) +
                            static_cast<std::size_t>(ix)];
      out << (ix ? " " : "") << static_cast<int>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
    }
    out << "\n";
  }
}

}  // namespace cylk
