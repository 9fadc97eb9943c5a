#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cylk/geometry.hpp"
#include "cylk/pattern.hpp"
#include "cylk/plcpp.hpp"
#include "cylk/rng.hpp"

namespace cylk {

enum class IntegralMode { MonteCarlo, Quadrature };

struct BayesConfig {
  // gamma priors, shape/rate
  double alpha_shape = 1.0, alpha_rate = 0.01;
  double rho_L_shape = 1.0, rho_L_rate = 0.05;
  // mu prior is uniform on the sphere/circle
  bool kappa_fixed = true;
  double kappa = 40.0;
  double kappa_max = 200.0;       // uniform prior support when kappa is free
  double sigma2_max = 0.0;        // uniform prior support; 0 = (diam/4)^2
  // proposal tunings
  double proposal_kappa0 = 100.0; // vMF concentration for mu proposals
  double proposal_sd_kappa = 2.0;
  double proposal_sd_sigma2 = 0.0;  // 0 = sigma2 init / 4
  // window integrals
  int mc_samples = 256;
  IntegralMode integral_mode = IntegralMode::MonteCarlo;
  // chain layout
  long long iterations = 20000;
  long long burn_in = 2000;
  long long thin = 10;
  int bdm_attempts = 10;
  std::uint64_t seed = 1;
  int store_line_samples = 0;     // equally spaced posterior line snapshots
  bool no_data_mode = false;      // drop the data likelihood (prior recovery)
  // initial values; non-positive / unset means derive a default
  double init_rho_L = 0.0, init_alpha = 0.0, init_sigma2 = 0.0;
  std::optional<Vec> init_mu;

  void validate() const;
};

// Unbiased Monte Carlo estimate of int_W f(p_{u^perp}(x - y) | sigma2) dx
// in coordinates centered at the anchor with axes (u, u^perp); the s
// coordinate is stratified.
struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};
McEstimate window_kernel_integral(const DirectedLine& line, double sigma2,
                                  const BoxWindow& w, int mc_n, RngStream& rng);

// Deterministic quadrature counterpart (exact in the lateral coordinate for
// d = 2; product rule for d = 3). Used as the shared evaluator in oracle
// tests and available as a chain mode.
double window_kernel_integral_quad(const DirectedLine& line, double sigma2,
                                   const BoxWindow& w, int n_nodes = 96);

// One latent line with its cached window integral and per-datum kernel row.
struct LineState {
  DirectedLine line;
  std::uint64_t id = 0;
  double c_integral = 0.0;
  std::vector<double> kernel;
};

struct McmcState {
  double rho_L = 1.0;
  Vec mu;
  double kappa = 0.0;
  double alpha = 1.0;
  double sigma2 = 1.0;
  std::vector<LineState> lines;
  std::size_t k() const { return lines.size(); }
};

struct TraceRow {
  long long iteration = 0;
  double rho_L = 0, kappa = 0, alpha = 0, sigma2 = 0, log_post = 0;
  Vec mu;
  int k = 0;
};

struct McmcTrace {
  int dim = 2;
  std::vector<TraceRow> rows;
  std::vector<LineSample> line_samples;
  long long prop_mu = 0, acc_mu = 0;
  long long prop_kappa = 0, acc_kappa = 0;
  long long prop_sigma2 = 0, acc_sigma2 = 0;
  long long prop_birth = 0, acc_birth = 0;
  long long prop_death = 0, acc_death = 0, null_death = 0;
  long long prop_move = 0, acc_move = 0;
};

void write_trace_csv(const McmcTrace& trace, const std::string& path);

// One chain of the missing-data sampler: Gibbs draws for alpha and rho_L,
// Metropolis random walks for mu, kappa, sigma2, and birth/death/move
// proposals for the latent lines.
class Sampler {
 public:
  Sampler(const PointPattern& data, const BayesConfig& config, const BoxWindow& w_ext);

  // Deterministic data-driven initialization (greedy line placement).
  void init();
  // Installs an explicit state; caches are rebuilt with the current sweep
  // evaluator.
  void load_state(const McmcState& s);

  const McmcState& state() const { return state_; }
  McmcState& state_mutable() { return state_; }
  const BoxWindow& window() const { return w_; }
  const BoxWindow& extended_window() const { return w_ext_; }

  // Fixes the auxiliary integral stream for a sweep and refreshes the
  // cached line integrals under it.
  void begin_sweep(long long sweep);

  void gibbs_update_alpha(RngStream& rng);
  void gibbs_update_rho_L(RngStream& rng);
  bool mh_update_mu(RngStream& rng);
  bool mh_update_kappa(RngStream& rng);
  bool mh_update_sigma2(RngStream& rng);
  // Returns +1/-1 for accepted/rejected birth, +2/-2 for death, +3/-3 for
  // move, 0 for the k = 1 null death.
  int birth_death_move(RngStream& rng);

  // Proposal-independent ratio pieces (exposed for the oracle tests).
  struct LineContrib {
    DirectedLine line;
    double c_integral;
    std::vector<double> kernel;
  };
  LineContrib make_contrib(const DirectedLine& line) const;
  double log_birth_ratio(const LineContrib& z) const;
  double log_death_ratio(std::size_t j) const;
  double log_move_ratio(std::size_t j, const LineContrib& z) const;
  void accept_birth(const LineContrib& z);
  void accept_death(std::size_t j);
  void accept_move(std::size_t j, const LineContrib& z);  // in-place replace

  // Hastings log ratios of the random-walk updates (the proposals above are
  // symmetric, so no proposal term appears). i_prop receives I(mu', kappa')
  // for reuse on acceptance.
  double log_mu_ratio(const UnitVector& mu_prop, double& i_prop) const;
  double log_kappa_ratio(double kappa_prop, double& i_prop) const;
  double log_sigma2_ratio(double sigma2_prop) const;

  // log posterior density (up to a constant) of the current state with
  // respect to lambda x nu per line, including all priors.
  double log_unnormalized_posterior() const;

  double cached_intensity_i() const { return intensity_i_; }
  double line_integral(const DirectedLine& line, std::uint64_t id, double sigma2) const;
  double kernel_value(const Vec& x, const DirectedLine& line, double sigma2) const;
  double sum_kernels(std::size_t i) const;  // resummed s_i
  double sigma2_max() const { return sigma2_max_; }

 private:
  void refresh_line_caches();
  double log_prior(double rho_L, double kappa, double alpha, double sigma2) const;

  PointPattern data_;
  BayesConfig cfg_;
  BoxWindow w_, w_ext_;
  McmcState state_;
  double intensity_i_ = 0.0;
  double sigma2_max_ = 0.0;
  double sigma2_step_ = 0.0;
  std::uint64_t sweep_key_ = 0;
  std::uint64_t next_line_id_ = 0;
};

McmcTrace run_chain(const PointPattern& data, const BayesConfig& config,
                    const BoxWindow& w_ext);

// Average of binary pixel images of the sampled line processes; a pixel is 1
// when some line crosses its cell. Row-major, iy * nx + ix, ix along axis 0.
std::vector<double> line_density_raster(const std::vector<LineSample>& samples,
                                        const BoxWindow& w, int nx, int ny);

void write_raster_csv(const std::vector<double>& grid, int nx, int ny,
                      const std::string& path);
void write_raster_pgm(const std::vector<double>& grid, int nx, int ny,
                      const std::string& path);

// Posterior line snapshots with their window, as consumed by the raster
// command.
void write_line_samples_json(const std::vector<LineSample>& samples,
                             const BoxWindow& w, const std::string& path);
std::pair<std::vector<LineSample>, BoxWindow> read_line_samples_json(
    const std::string& path);

}  // namespace cylk
