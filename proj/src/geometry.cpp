#include "cylk/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cylk {

namespace {
void check_dim(int d) {
  if (d != 2 && d != 3) throw std::invalid_argument("dimension must be 2 or 3");
}
}  // namespace

Vec Vec::zero(int d) {
  check_dim(d);
  Vec v;
  v.dim = d;
  return v;
}

Vec Vec::operator+(const Vec& o) const {
  Vec r = *this;
  for (int i = 0; i < dim; ++i) r[i] += o[i];
  return r;
}

Vec Vec::operator-(const Vec& o) const {
  Vec r = *this;
  for (int i = 0; i < dim; ++i) r[i] -= o[i];
  return r;
}

Vec Vec::operator*(double s) const {
  Vec r = *this;
  for (int i = 0; i < dim; ++i) r[i] *= s;
  return r;
}

double Vec::dot(const Vec& o) const {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += c[static_cast<std::size_t>(i)] * o[i];
  return s;
}

double Vec::norm2() const { return dot(*this); }
double Vec::norm() const { return std::sqrt(norm2()); }

UnitVector::UnitVector(const Vec& v) : v_(v) {
  check_dim(v.dim);
  if (std::abs(v.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("UnitVector: input is not unit length");
}

UnitVector UnitVector::normalized(const Vec& v) {
  check_dim(v.dim);
  const double n = v.norm();
  if (!(n > 0)) throw std::invalid_argument("UnitVector: cannot normalize zero vector");
  Vec r = v * (1.0 / n);
  // renormalize once more to push the norm within tolerance
  return UnitVector(r * (1.0 / r.norm()));
}

UnitVector UnitVector::axis(int dim, int i, double sign) {
  Vec v = Vec::zero(dim);
  v[i] = sign >= 0 ? 1.0 : -1.0;
  return UnitVector(v);
}

UnitVector UnitVector::from_angle(double phi) {
  return UnitVector::normalized(Vec(std::cos(phi), std::sin(phi)));
}

UnitVector UnitVector::operator-() const { return UnitVector(v_ * -1.0); }

double UnitVector::angle() const {
  if (dim() != 2) throw std::invalid_argument("angle() requires dim 2");
  double a = std::atan2(v_[1], v_[0]);
  if (a < 0) a += 2.0 * kPi;
  return a;
}

Rotation Rotation::identity(int d) {
  check_dim(d);
  Rotation r(d);
  for (int i = 0; i < d; ++i) r.m_[static_cast<std::size_t>(i * d + i)] = 1.0;
  return r;
}

Vec Rotation::apply(const Vec& x) const {
  Vec r = Vec::zero(dim_);
  for (int i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (int j = 0; j < dim_; ++j) s += at(i, j) * x[j];
    r[i] = s;
  }
  return r;
}

Vec Rotation::apply_transpose(const Vec& x) const {
  Vec r = Vec::zero(dim_);
  for (int i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (int j = 0; j < dim_; ++j) s += at(j, i) * x[j];
    r[i] = s;
  }
  return r;
}

Vec Rotation::column(int j) const {
  Vec r = Vec::zero(dim_);
  for (int i = 0; i < dim_; ++i) r[i] = at(i, j);
  return r;
}

Rotation rotation_to(const UnitVector& u) {
  const int d = u.dim();
  Rotation r(d);
  // u = -e_d exactly: flip the last two axes.
  bool is_neg_ed = std::abs(u.last() + 1.0) <= 0.0;
  for (int i = 0; i < d - 1; ++i)
    if (u[i] != 0.0) is_neg_ed = false;
  if (is_neg_ed) {
    for (int i = 0; i < d; ++i)
      r.m_[static_cast<std::size_t>(i * d + i)] = (i >= d - 2) ? -1.0 : 1.0;
    return r;
  }
  // Householder pair: H_a maps +-e_d to u, G restores det +1. The branch
  // keeps ||a|| away from zero for u near either pole.
  Vec a = u.vec();
  const bool upper = u.last() >= 0.0;
  a[d - 1] += upper ? 1.0 : -1.0;
  const double a2 = a.norm2();
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      double h = (i == j ? 1.0 : 0.0) - 2.0 * a[i] * a[j] / a2;
      // right-multiply by diag with -1 at (d-1) [upper] or at 0 [lower]
      const int flip = upper ? d - 1 : 0;
      if (j == flip) h = -h;
      r.m_[static_cast<std::size_t>(i * d + j)] = h;
    }
  }
  return r;
}

Vec project_complement(const Vec& x, const UnitVector& u) {
  return x - u.vec() * x.dot(u.vec());
}

BoxWindow::BoxWindow(const Vec& lo, const Vec& hi) : lower(lo), upper(hi) {
  check_dim(lo.dim);
  if (hi.dim != lo.dim) throw std::invalid_argument("BoxWindow: dim mismatch");
  for (int i = 0; i < lo.dim; ++i)
    if (!(hi[i] > lo[i])) throw std::invalid_argument("BoxWindow: upper must exceed lower");
  if (!std::isfinite(volume()) || !(volume() > 0))
    throw std::invalid_argument("BoxWindow: volume must be finite and positive");
}

double BoxWindow::volume() const {
  double v = 1.0;
  for (int i = 0; i < dim(); ++i) v *= side(i);
  return v;
}

bool BoxWindow::contains(const Vec& x) const {
  for (int i = 0; i < dim(); ++i)
    if (x[i] < lower[i] || x[i] > upper[i]) return false;
  return true;
}

Vec BoxWindow::center() const {
  Vec r = Vec::zero(dim());
  for (int i = 0; i < dim(); ++i) r[i] = 0.5 * (lower[i] + upper[i]);
  return r;
}

double BoxWindow::diameter() const {
  double s = 0.0;
  for (int i = 0; i < dim(); ++i) s += side(i) * side(i);
  return std::sqrt(s);
}

double BoxWindow::min_side() const {
  double s = side(0);
  for (int i = 1; i < dim(); ++i) s = std::min(s, side(i));
  return s;
}

double BoxWindow::boundary_distance(const Vec& x) const {
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim(); ++i) {
    d = std::min(d, x[i] - lower[i]);
    d = std::min(d, upper[i] - x[i]);
  }
  return d;
}

BoxWindow BoxWindow::inflated(double margin) const {
  Vec lo = lower, hi = upper;
  for (int i = 0; i < dim(); ++i) {
    lo[i] -= margin;
    hi[i] += margin;
  }
  return BoxWindow(lo, hi);
}

std::vector<Vec> BoxWindow::corners() const {
  std::vector<Vec> out;
  const int d = dim();
  const int n = 1 << d;
  out.reserve(static_cast<std::size_t>(n));
  for (int mask = 0; mask < n; ++mask) {
    Vec p = Vec::zero(d);
    for (int i = 0; i < d; ++i) p[i] = (mask & (1 << i)) ? upper[i] : lower[i];
    out.push_back(p);
  }
  return out;
}

Cylinder::Cylinder(const UnitVector& u, double r, double t)
    : direction(u), radius(r), half_height(t) {
  if (!(r > 0) || !(t > 0))
    throw std::invalid_argument("Cylinder: radius and half_height must be > 0");
}

bool cylinder_contains(const Vec& x, const Cylinder& c) {
  const double s = x.dot(c.direction.vec());
  if (std::abs(s) > c.half_height) return false;
  const double lat2 = x.norm2() - s * s;
  return lat2 <= c.radius * c.radius;
}

DirectedLine::DirectedLine(const Vec& y, const UnitVector& u)
    : anchor(y), direction(u) {
  if (y.dim != u.dim()) throw std::invalid_argument("DirectedLine: dim mismatch");
  if (y[y.dim - 1] != 0.0)
    throw std::invalid_argument("DirectedLine: anchor must lie on H (last coord 0)");
  if (std::abs(u.last()) <= 0.0)
    throw std::invalid_argument("DirectedLine: direction must have nonzero last coordinate");
}

Vec DirectedLine::point_at(double s) const { return anchor + direction.vec() * s; }

DirectedLine line_through(const Vec& x, const UnitVector& u) {
  Vec y = x - u.vec() * (x[x.dim - 1] / u.last());
  y[x.dim - 1] = 0.0;  // exact, not merely within rounding
  return DirectedLine(y, u);
}

std::optional<std::pair<double, double>> clip_line_params(const DirectedLine& l,
                                                          const BoxWindow& w) {
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < w.dim(); ++i) {
    const double ui = l.direction[i];
    const double yi = l.anchor[i];
    if (ui == 0.0) {
      if (yi < w.lower[i] || yi > w.upper[i]) return std::nullopt;
      continue;
    }
    double a = (w.lower[i] - yi) / ui;
    double b = (w.upper[i] - yi) / ui;
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
    if (t0 > t1) return std::nullopt;
  }
  return std::make_pair(t0, t1);
}

bool line_hits_box(const DirectedLine& l, const BoxWindow& w) {
  return clip_line_params(l, w).has_value();
}

std::pair<double, double> support_interval(const DirectedLine& l, const BoxWindow& w) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Vec& c : w.corners()) {
    const double s = (c - l.anchor).dot(l.direction.vec());
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return {lo, hi};
}

std::pair<double, double> lateral_interval_2d(double phi, double a) {
  const double s = std::sin(phi);
  if (s == 0.0) throw std::invalid_argument("lateral_interval_2d: direction parallel to H");
  const double cot = std::cos(phi) / s;
  // quadrant branches of the closed-form interval for [-a, a]^2
  const bool first = (phi > 0 && phi <= kPi / 2) || (phi > kPi && phi <= 1.5 * kPi);
  if (first) return {-a * cot - a, a * cot + a};
  return {a * cot - a, a - a * cot};
}

double lateral_measure(const UnitVector& u, const BoxWindow& w) {
  const int d = u.dim();
  if (w.dim() != d) throw std::invalid_argument("lateral_measure: dim mismatch");
  const double ud = std::abs(u.last());
  if (ud == 0.0) throw std::invalid_argument("lateral_measure: degenerate direction");
  // shadow measure of the box: sum of per-axis face shadows
  double total = 0.0;
  for (int i = 0; i < d; ++i) {
    double prod = 1.0;
    for (int j = 0; j < d; ++j)
      if (j != i) prod *= w.side(j);
    total += prod * std::abs(u[i]);
  }
  return total / ud;
}

Vec shadow_onto_h(const Vec& p, const UnitVector& u) {
  const int d = p.dim;
  Vec y = p - u.vec() * (p[d - 1] / u.last());
  y[d - 1] = 0.0;
  return y;
}

BoxWindow shadow_bbox(const BoxWindow& w, const UnitVector& u) {
  const int d = w.dim();
  Vec lo = Vec::zero(d), hi = Vec::zero(d);
  for (int i = 0; i < d - 1; ++i) {
    lo[i] = std::numeric_limits<double>::infinity();
    hi[i] = -lo[i];
  }
  for (const Vec& c : w.corners()) {
    const Vec s = shadow_onto_h(c, u);
    for (int i = 0; i < d - 1; ++i) {
      lo[i] = std::min(lo[i], s[i]);
      hi[i] = std::max(hi[i], s[i]);
    }
  }
  // last axis is a dummy so BoxWindow stays well-formed
  lo[d - 1] = 0.0;
  hi[d - 1] = 1.0;
  return BoxWindow(lo, hi);
}

}  // namespace cylk
