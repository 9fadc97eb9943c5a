#include "cylk/summaries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "cylk/grid.hpp"
#include "cylk/numeric.hpp"

namespace cylk {

namespace {

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw DataError("argument grid is empty");
  if (!(grid.front() > 0)) throw DataError("argument grid values must be > 0");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw DataError("argument grid must be strictly increasing");
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Pair weight callback: first index is the 'center' point of the ordered pair.
struct CombinedAxes {
  int m;        // temporal axis
  int q1, q2;   // spatial axes
};

CombinedAxes combined_axes(const PointPattern& p, const UnitVector& u) {
  if (p.dim != 3)
    throw DataError("combined correction requires a three-dimensional pattern");
  int m = -1;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(std::abs(u[i]) - 1.0) <= 1e-12) m = i;
  }
  if (m < 0) throw DataError("combined correction requires an axis direction");
  for (int i = 0; i < 3; ++i)
    if (std::abs(p.window.lower[i]) > 0)
      throw DataError("combined correction requires a window anchored at the origin");
  return {m, m == 0 ? 1 : 0, m == 2 ? 1 : 2};
}

}  // namespace

SummaryCurve make_curve(std::vector<double> args, std::vector<double> values,
                        std::string statistic) {
  if (args.size() != values.size())
    throw std::invalid_argument("SummaryCurve: args/values length mismatch");
  for (std::size_t i = 1; i < args.size(); ++i)
    if (!(args[i] > args[i - 1]))
      throw std::invalid_argument("SummaryCurve: args must be strictly increasing");
  SummaryCurve c;
  c.args = std::move(args);
  c.values = std::move(values);
  c.statistic = std::move(statistic);
  return c;
}

void write_curve_csv(const SummaryCurve& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write curve file: " + path);
  out << "# statistic: " << c.statistic << "\n";
  if (c.direction) {
    out << "# direction:";
    for (int i = 0; i < c.direction->dim; ++i) out << " " << fmt17((*c.direction)[i]);
    out << "\n";
  }
  if (c.t) out << "# t: " << fmt17(*c.t) << "\n";
  if (c.r) out << "# r: " << fmt17(*c.r) << "\n";
  if (c.correction)
    out << "# correction: "
        << (*c.correction == CorrectionKind::Translation ? "translation" : "combined") << "\n";
  out << "arg,value\n";
  for (std::size_t i = 0; i < c.args.size(); ++i)
    out << fmt17(c.args[i]) << "," << fmt17(c.values[i]) << "\n";
}

double rho2_hat(const PointPattern& p) {
  const double n = static_cast<double>(p.size());
  if (p.size() < 2) throw DataError("rho2_hat: need at least 2 points");
  const double vol = p.window.volume();
  return n * (n - 1.0) / (vol * vol);
}

namespace {

// Shared per-pair accumulation so the accelerated and naive paths sum
// identical floating point values in identical order.
template <typename WeightFn>
inline void accumulate_pair(const Vec& xi, const Vec& xj, const Vec& u, double t,
                            const std::vector<double>& r_grid, double r_max,
                            const WeightFn& weight, std::vector<double>& buckets) {
  const Vec diff = xj - xi;
  double s = 0.0;
  for (int a = 0; a < diff.dim; ++a) s += diff[a] * u[a];
  if (std::abs(s) > t) return;
  double lat2 = diff.norm2() - s * s;
  if (lat2 < 0.0) lat2 = 0.0;
  const double lat = std::sqrt(lat2);
  if (lat > r_max) return;
  const std::size_t idx = static_cast<std::size_t>(
      std::lower_bound(r_grid.begin(), r_grid.end(), lat) - r_grid.begin());
  if (idx >= r_grid.size()) return;
  buckets[idx] += weight(xi, xj, diff);
}

}  // namespace

SummaryCurve cylindrical_k(const PointPattern& p, const UnitVector& u,
                           const std::vector<double>& r_grid, double t,
                           CorrectionKind corr, bool accelerated) {
  if (p.size() < 2) throw DataError("cylindrical_k: need at least 2 points");
  if (u.dim() != p.dim) throw DataError("cylindrical_k: direction dimension mismatch");
  if (!(t > 0)) throw DataError("cylindrical_k: t must be > 0");
  check_grid(r_grid);

  const double r_max = r_grid.back();
  std::vector<double> buckets(r_grid.size(), 0.0);
  const Vec& uv = u.vec();

  CombinedAxes axes{0, 1, 2};
  if (corr == CorrectionKind::Combined) axes = combined_axes(p, u);
  const BoxWindow& w = p.window;

  auto weight = [&](const Vec& xi, const Vec& xj, const Vec& diff) -> double {
    if (corr == CorrectionKind::Translation) {
      const double overlap = translation_overlap(w, diff);
      if (!(overlap > 0))
        throw NumericError("cylindrical_k: pair with zero window overlap");
      return 1.0 / overlap;
    }
    const double mid = 2.0 * xi[axes.m] - xj[axes.m];
    const double temporal =
        (mid < w.lower[axes.m] || mid > w.upper[axes.m]) ? 2.0 : 1.0;
    const double d1 = w.side(axes.q1) - std::abs(diff[axes.q1]);
    const double d2 = w.side(axes.q2) - std::abs(diff[axes.q2]);
    if (!(d1 > 0) || !(d2 > 0))
      throw NumericError("cylindrical_k: pair with zero spatial overlap");
    return temporal / (w.side(axes.m) * d1 * d2);
  };

  const std::size_t n = p.size();
  if (!accelerated) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        accumulate_pair(p.points[i], p.points[j], uv, t, r_grid, r_max, weight, buckets);
      }
  } else {
    const double reach = std::sqrt(r_max * r_max + t * t);
    NeighborGrid grid(p.points, p.window, std::max(reach, 1e-9));
    std::vector<std::size_t> cand;
    for (std::size_t i = 0; i < n; ++i) {
      grid.gather(p.points[i], reach, cand);
      for (std::size_t j : cand) {
        if (j == i) continue;
        accumulate_pair(p.points[i], p.points[j], uv, t, r_grid, r_max, weight, buckets);
      }
    }
  }

  const double denom = rho2_hat(p);
  std::vector<double> values(r_grid.size());
  double acc = 0.0;
  for (std::size_t g = 0; g < r_grid.size(); ++g) {
    acc += buckets[g];
    values[g] = acc / denom;
  }
  SummaryCurve c = make_curve(r_grid, std::move(values), "K_cyl");
  c.direction = u.vec();
  c.t = t;
  c.correction = corr;
  return c;
}

SummaryCurve directional_scan(const PointPattern& p, const std::vector<double>& phis,
                              double r, double t) {
  if (p.dim != 2) throw DataError("directional_scan: requires a planar pattern");
  if (p.size() < 2) throw DataError("directional_scan: need at least 2 points");
  if (phis.empty()) throw DataError("directional_scan: empty angle grid");
  for (std::size_t i = 1; i < phis.size(); ++i)
    if (!(phis[i] > phis[i - 1]))
      throw DataError("directional_scan: angles must be strictly increasing");
  if (!(r > 0) || !(t > 0)) throw DataError("directional_scan: r and t must be > 0");

  // unordered pairs within reach, each counted twice in the ordered sum
  const double reach = std::sqrt(r * r + t * t);
  struct PairRec {
    double dx, dy, w;
  };
  std::vector<PairRec> pairs;
  NeighborGrid grid(p.points, p.window, std::max(reach, 1e-9));
  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < p.size(); ++i) {
    grid.gather(p.points[i], reach, cand);
    for (std::size_t j : cand) {
      if (j <= i) continue;
      const Vec diff = p.points[j] - p.points[i];
      if (diff.norm2() > reach * reach) continue;
      pairs.push_back({diff[0], diff[1], 1.0 / translation_overlap(p.window, diff)});
    }
  }

  const double denom = rho2_hat(p);
  std::vector<double> values(phis.size(), 0.0);
  for (std::size_t g = 0; g < phis.size(); ++g) {
    const double cph = std::cos(phis[g]);
    const double sph = std::sin(phis[g]);
    double sum = 0.0;
    for (const PairRec& pr : pairs) {
      const double s = pr.dx * cph + pr.dy * sph;
      if (std::abs(s) > t) continue;
      const double lat2 = pr.dx * pr.dx + pr.dy * pr.dy - s * s;
      if (lat2 > r * r) continue;
      sum += pr.w;
    }
    values[g] = 2.0 * sum / denom;
  }
  SummaryCurve c = make_curve(phis, std::move(values), "K_scan");
  c.r = r;
  c.t = t;
  c.correction = CorrectionKind::Translation;
  return c;
}

SummaryCurve ripley_k(const PointPattern& p, const std::vector<double>& r_grid) {
  if (p.size() < 2) throw DataError("ripley_k: need at least 2 points");
  check_grid(r_grid);
  const double r_max = r_grid.back();
  std::vector<double> buckets(r_grid.size(), 0.0);
  NeighborGrid grid(p.points, p.window, std::max(r_max, 1e-9));
  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < p.size(); ++i) {
    grid.gather(p.points[i], r_max, cand);
    for (std::size_t j : cand) {
      if (j == i) continue;
      const Vec diff = p.points[j] - p.points[i];
      const double d = diff.norm();
      if (d > r_max) continue;
      const std::size_t idx = static_cast<std::size_t>(
          std::lower_bound(r_grid.begin(), r_grid.end(), d) - r_grid.begin());
      if (idx >= r_grid.size()) continue;
      buckets[idx] += 1.0 / translation_overlap(p.window, diff);
    }
  }
  const double denom = rho2_hat(p);
  std::vector<double> values(r_grid.size());
  double acc = 0.0;
  for (std::size_t g = 0; g < r_grid.size(); ++g) {
    acc += buckets[g];
    values[g] = acc / denom;
  }
  SummaryCurve c = make_curve(r_grid, std::move(values), "K_iso");
  c.correction = CorrectionKind::Translation;
  return c;
}

FgjResult fgj_estimates(const PointPattern& p, const std::vector<double>& r_grid,
                        int min_anchors) {
  if (p.dim != 2) throw DataError("fgj_estimates: requires a planar pattern");
  if (p.size() < 2)
    throw DataError("fgj_estimates: need at least 2 points for nearest neighbours");
  check_grid(r_grid);

  const std::size_t n = p.size();
  const double spacing = std::sqrt(p.window.volume() / static_cast<double>(n));
  NeighborGrid grid(p.points, p.window, std::max(spacing, 1e-9));

  // reduced-sample G
  std::vector<double> nn(n), bdist(n);
  for (std::size_t i = 0; i < n; ++i) {
    nn[i] = grid.nearest_distance(p.points[i], i);
    bdist[i] = p.window.boundary_distance(p.points[i]);
  }
  std::vector<double> gvals(r_grid.size(), 0.0);
  for (std::size_t g = 0; g < r_grid.size(); ++g) {
    const double r = r_grid[g];
    long long num = 0, den = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (bdist[i] >= r) {
        ++den;
        if (nn[i] <= r) ++num;
      }
    }
    gvals[g] = den > 0 ? static_cast<double>(num) / static_cast<double>(den)
                       : (g > 0 ? gvals[g - 1] : 0.0);
  }

  // reduced-sample F over a regular anchor lattice
  const int m = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(min_anchors))));
  std::vector<double> fvals(r_grid.size(), 0.0);
  std::vector<double> anchor_nn, anchor_b;
  anchor_nn.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      Vec x = Vec::zero(2);
      x[0] = p.window.lower[0] + (a + 0.5) / m * p.window.side(0);
      x[1] = p.window.lower[1] + (b + 0.5) / m * p.window.side(1);
      anchor_nn.push_back(grid.nearest_distance(x, NeighborGrid::npos));
      anchor_b.push_back(p.window.boundary_distance(x));
    }
  }
  for (std::size_t g = 0; g < r_grid.size(); ++g) {
    const double r = r_grid[g];
    long long num = 0, den = 0;
    for (std::size_t i = 0; i < anchor_nn.size(); ++i) {
      if (anchor_b[i] >= r) {
        ++den;
        if (anchor_nn[i] <= r) ++num;
      }
    }
    fvals[g] = den > 0 ? static_cast<double>(num) / static_cast<double>(den)
                       : (g > 0 ? fvals[g - 1] : 0.0);
  }

  // clamp to non-decreasing [0, 1]
  auto clamp_monotone = [](std::vector<double>& v) {
    double running = 0.0;
    for (double& x : v) {
      running = std::clamp(std::max(running, x), 0.0, 1.0);
      x = running;
    }
  };
  clamp_monotone(gvals);
  clamp_monotone(fvals);

  std::vector<double> jargs, jvals;
  for (std::size_t g = 0; g < r_grid.size(); ++g) {
    if (fvals[g] < 1.0 - 1e-12) {
      jargs.push_back(r_grid[g]);
      jvals.push_back((1.0 - gvals[g]) / (1.0 - fvals[g]));
    }
  }

  FgjResult out{make_curve(r_grid, std::move(fvals), "F"),
                make_curve(r_grid, std::move(gvals), "G"),
                make_curve(std::move(jargs), std::move(jvals), "J")};
  return out;
}

}  // namespace cylk
