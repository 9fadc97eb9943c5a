#pragma once

#include "cylk/geometry.hpp"
#include "cylk/rng.hpp"

namespace cylk {

// von Mises-Fisher density on S^{d-1} with respect to the surface measure,
// f(u | mu, kappa) = c_d(kappa) exp(kappa mu . u). kappa = 0 gives the
// uniform density on the sphere/circle.
double vmf_log_density(const UnitVector& u, const UnitVector& mu, double kappa);
double vmf_density(const UnitVector& u, const UnitVector& mu, double kappa);
double vmf_log_norm_const(int dim, double kappa);  // log c_d(kappa)

// Exact samplers: Best-Fisher wrapped rejection for d = 2, the closed-form
// inverse transform for the cosine of the colatitude for d = 3.
UnitVector sample_vmf(const UnitVector& mu, double kappa, RngStream& rng);

}  // namespace cylk
