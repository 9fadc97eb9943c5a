#include "cylk/vmf.hpp"

#include <cmath>
#include <stdexcept>

#include "cylk/numeric.hpp"

namespace cylk {

double vmf_log_norm_const(int dim, double kappa) {
  if (kappa < 0) throw std::invalid_argument("vmf: kappa must be >= 0");
  if (dim == 2) {
    return -std::log(2.0 * kPi) - log_bessel_i0(kappa);
  }
  if (dim == 3) {
    // c_3(kappa) = kappa / (4 pi sinh kappa)
    if (kappa < 1e-8) return -std::log(4.0 * kPi) - std::log1p(kappa * kappa / 6.0);
    return std::log(kappa) - std::log(2.0 * kPi) - kappa - std::log1p(-std::exp(-2.0 * kappa));
  }
  throw std::invalid_argument("vmf: dim must be 2 or 3");
}

double vmf_log_density(const UnitVector& u, const UnitVector& mu, double kappa) {
  return vmf_log_norm_const(mu.dim(), kappa) + kappa * mu.vec().dot(u.vec());
}

double vmf_density(const UnitVector& u, const UnitVector& mu, double kappa) {
  return std::exp(vmf_log_density(u, mu, kappa));
}

namespace {

// Best & Fisher (1979) von Mises sampler, angle relative to the mean.
double sample_von_mises_angle(double kappa, RngStream& rng) {
  if (kappa < 1e-10) return rng.uniform(0.0, 2.0 * kPi) - kPi;
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  for (;;) {
    const double z = std::cos(kPi * rng.uniform());
    const double f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    const double u2 = rng.uniform();
    if (c * (2.0 - c) - u2 > 0.0 || (u2 > 0 && std::log(c / u2) + 1.0 - c >= 0.0)) {
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      return sign * std::acos(std::clamp(f, -1.0, 1.0));
    }
  }
}

}  // namespace

UnitVector sample_vmf(const UnitVector& mu, double kappa, RngStream& rng) {
  if (kappa < 0) throw std::invalid_argument("vmf: kappa must be >= 0");
  const int d = mu.dim();
  if (d == 2) {
    const double theta = mu.angle() + sample_von_mises_angle(kappa, rng);
    return UnitVector::from_angle(theta);
  }
  // d == 3: draw w = cos(colatitude) by inverse transform, azimuth uniform,
  // then rotate so the pole maps to mu.
  double w;
  if (kappa < 1e-8) {
    w = rng.uniform(-1.0, 1.0);
  } else {
    const double xi = rng.uniform();
    w = 1.0 + std::log1p(-(1.0 - xi) * (1.0 - std::exp(-2.0 * kappa))) / kappa;
    w = std::clamp(w, -1.0, 1.0);
  }
  const double az = rng.uniform(0.0, 2.0 * kPi);
  const double lat = std::sqrt(std::max(0.0, 1.0 - w * w));
  const Vec local(lat * std::cos(az), lat * std::sin(az), w);
  return UnitVector::normalized(rotation_to(mu).apply(local));
}

}  // namespace cylk
