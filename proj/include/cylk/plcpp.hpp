#pragma once

#include <vector>

#include "cylk/geometry.hpp"
#include "cylk/pattern.hpp"
#include "cylk/rng.hpp"

namespace cylk {

// Poisson line cluster point process parameters: line intensity rho_L with a
// von Mises-Fisher rose of directions (mu, kappa), on-line point intensity
// alpha, and isotropic Gaussian displacement variance sigma2 per lateral
// axis. `degenerate` pins every line parallel to the last axis, in which
// case kappa is ignored.
struct PlcppParams {
  double rho_L;
  UnitVector mu;
  double kappa;
  double alpha;
  double sigma2;
  bool degenerate = false;

  PlcppParams(double rho_L_, const UnitVector& mu_, double kappa_, double alpha_,
              double sigma2_, bool degenerate_ = false);
  int dim() const { return mu.dim(); }
};

struct LineSample {
  std::vector<DirectedLine> lines;
};

// Line proposal acceptance: Exact uses |u_d| lambda(J_u) / sup, SineOnly is
// the bare |u_d| acceptance (kept for comparison; it ignores the varying
// measure of J_u under the uniform anchor proposal).
enum class LineProposal { Exact, SineOnly };

// E_R |u^(d)| under the rose of directions; beta = rho_L * mean_abs_last.
double mean_abs_last(const UnitVector& mu, double kappa);
double beta_from_rose(const PlcppParams& params);

// I(mu, kappa) = int lambda(J_u) |u^(d)| f(u | mu, kappa) nu(du) for the
// extended window; the mean number of lines hitting w_ext is rho_L * I.
double intensity_I(const PlcppParams& params, const BoxWindow& w_ext);

// Poisson sample of the lines hitting w_ext.
LineSample sample_line_process(const PlcppParams& params, const BoxWindow& w_ext,
                               RngStream& rng, LineProposal proposal = LineProposal::Exact);

// Uniform anchor on J_u (exact for d = 2, rejection from the shadow
// bounding box for d = 3).
Vec sample_uniform_anchor(const UnitVector& u, const BoxWindow& w_ext, RngStream& rng);

// I(mu, kappa) without a full parameter object.
double intensity_I(const UnitVector& mu, double kappa, bool degenerate,
                   const BoxWindow& w_ext);

// Full simulation inside w (w must be contained in w_ext). Lines are drawn
// in w_ext, each carries a Poisson(alpha * length) set of points on the
// projection segment of w, and points are displaced laterally by the
// Gaussian kernel. keep_latent retains lines/parents/displacements.
LatentRealization simulate(const PlcppParams& params, const BoxWindow& w,
                           const BoxWindow& w_ext, RngStream& rng,
                           bool keep_latent = false,
                           LineProposal proposal = LineProposal::Exact);

// Theoretical pair correlation g(x) and intensity rho = alpha rho_L.
double pcf_theoretical(const PlcppParams& params, const Vec& x);
double intensity_theoretical(const PlcppParams& params);

// Total one-dimensional length of the sampled lines inside a region.
double line_length_in(const LineSample& lines, const BoxWindow& region);

// Default extended window: inflate w by `factor` times the displacement
// standard deviation on every axis.
BoxWindow default_extended_window(const PlcppParams& params, const BoxWindow& w,
                                  double factor = 5.0);

}  // namespace cylk
