#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

namespace cylk {

inline constexpr double kPi = 3.14159265358979323846;

// Point or displacement in R^d, d in {2, 3}. Fixed capacity keeps everything
// on the stack; dim is carried explicitly.
struct Vec {
  int dim = 0;
  std::array<double, 3> c{0.0, 0.0, 0.0};

  Vec() = default;
  Vec(double x, double y) : dim(2), c{x, y, 0.0} {}
  Vec(double x, double y, double z) : dim(3), c{x, y, z} {}
  static Vec zero(int d);

  double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }

  Vec operator+(const Vec& o) const;
  Vec operator-(const Vec& o) const;
  Vec operator*(double s) const;
  double dot(const Vec& o) const;
  double norm2() const;
  double norm() const;
};

class UnitVector {
 public:
  // Throws std::invalid_argument unless ||v|| == 1 within 1e-12.
  explicit UnitVector(const Vec& v);
  // Rescales v to unit length (throws on the zero vector).
  static UnitVector normalized(const Vec& v);
  static UnitVector axis(int dim, int i, double sign = 1.0);
  // Planar direction (cos phi, sin phi).
  static UnitVector from_angle(double phi);

  const Vec& vec() const { return v_; }
  double operator[](int i) const { return v_[i]; }
  int dim() const { return v_.dim; }
  double last() const { return v_[v_.dim - 1]; }
  UnitVector operator-() const;
  // Angle in [0, 2pi) for dim 2.
  double angle() const;

 private:
  Vec v_;
};

// Orthonormal d x d matrix with det +1, stored row-major.
class Rotation {
 public:
  static Rotation identity(int d);
  Vec apply(const Vec& x) const;
  Vec apply_transpose(const Vec& x) const;
  Vec column(int j) const;
  double at(int i, int j) const { return m_[static_cast<std::size_t>(i * dim_ + j)]; }
  int dim() const { return dim_; }

 private:
  friend Rotation rotation_to(const UnitVector& u);
  Rotation(int d) : dim_(d) { m_.fill(0.0); }
  int dim_;
  std::array<double, 9> m_;
};

// Axis-aligned box with positive extent on every axis.
struct BoxWindow {
  Vec lower, upper;

  BoxWindow(const Vec& lo, const Vec& hi);
  int dim() const { return lower.dim; }
  double side(int i) const { return upper[i] - lower[i]; }
  double volume() const;
  bool contains(const Vec& x) const;  // closed
  Vec center() const;
  double diameter() const;
  double min_side() const;
  // Distance from x to the boundary (negative outside).
  double boundary_distance(const Vec& x) const;
  BoxWindow inflated(double margin) const;
  std::vector<Vec> corners() const;
};

struct Cylinder {
  UnitVector direction;
  double radius;       // r > 0
  double half_height;  // t > 0

  Cylinder(const UnitVector& u, double r, double t);
};

// Line in phase representation: anchor on the hyperplane H = {x_d = 0} plus a
// unit direction with nonzero last coordinate.
struct DirectedLine {
  Vec anchor;
  UnitVector direction;

  DirectedLine(const Vec& y, const UnitVector& u);
  Vec point_at(double s) const;
};

// Anchors the line through x with direction u on H.
DirectedLine line_through(const Vec& x, const UnitVector& u);

// Deterministic rotation with R e_d = u (reflection-based construction).
Rotation rotation_to(const UnitVector& u);

// Orthogonal projection of x onto the hyperplane perpendicular to u.
Vec project_complement(const Vec& x, const UnitVector& u);

// Closed cylinder membership for the cylinder centered at the origin.
bool cylinder_contains(const Vec& x, const Cylinder& c);

// Parameter interval of line \cap box, empty when the line misses.
std::optional<std::pair<double, double>> clip_line_params(const DirectedLine& l,
                                                          const BoxWindow& w);
bool line_hits_box(const DirectedLine& l, const BoxWindow& w);

// Parameter range {s : (l(s) + u^perp) meets w}, i.e. the projection of the
// box onto the line; its length is sum_i a_i |u_i|.
std::pair<double, double> support_interval(const DirectedLine& l, const BoxWindow& w);

// J_phi for the square [-a, a]^2: anchors y = (y1, 0) whose line with angle
// phi hits the square. Throws for phi a multiple of pi.
std::pair<double, double> lateral_interval_2d(double phi, double a);

// (d-1)-measure of J_u = {y in H : line(y, u) hits w}.
double lateral_measure(const UnitVector& u, const BoxWindow& w);

// Oblique shadow of a point along u onto H.
Vec shadow_onto_h(const Vec& p, const UnitVector& u);

// Bounding box (in the first d-1 coordinates, last set to 0) of the shadow
// of w along u; J_u is contained in it and fills it exactly for d = 2.
BoxWindow shadow_bbox(const BoxWindow& w, const UnitVector& u);

}  // namespace cylk
