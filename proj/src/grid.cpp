#include "cylk/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cylk {

NeighborGrid::NeighborGrid(const std::vector<Vec>& points, const BoxWindow& window,
                           double cell_size)
    : points_(points), window_(window), cell_(cell_size), dim_(window.dim()) {
  std::size_t total = 1;
  for (int i = 0; i < dim_; ++i) {
    n_[i] = std::max(1, static_cast<int>(std::floor(window.side(i) / cell_)));
    n_[i] = std::min(n_[i], 256);
    total *= static_cast<std::size_t>(n_[i]);
  }
  cells_.assign(total, {});
  for (std::size_t idx = 0; idx < points.size(); ++idx)
    cells_[cell_of(points[idx])].push_back(idx);
}

std::size_t NeighborGrid::cell_of(const Vec& x) const {
  std::size_t id = 0;
  for (int i = 0; i < dim_; ++i) {
    double t = (x[i] - window_.lower[i]) / window_.side(i);
    int k = static_cast<int>(t * n_[i]);
    k = std::clamp(k, 0, n_[i] - 1);
    id = id * static_cast<std::size_t>(n_[i]) + static_cast<std::size_t>(k);
  }
  return id;
}

void NeighborGrid::gather(const Vec& x, double radius, std::vector<std::size_t>& out) const {
  out.clear();
  int lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
  for (int i = 0; i < dim_; ++i) {
    const double w = window_.side(i) / n_[i];
    int a = static_cast<int>(std::floor((x[i] - radius - window_.lower[i]) / w));
    int b = static_cast<int>(std::floor((x[i] + radius - window_.lower[i]) / w));
    lo[i] = std::clamp(a, 0, n_[i] - 1);
    hi[i] = std::clamp(b, 0, n_[i] - 1);
  }
  const int ky_lo = dim_ >= 2 ? lo[1] : 0, ky_hi = dim_ >= 2 ? hi[1] : 0;
  const int kz_lo = dim_ >= 3 ? lo[2] : 0, kz_hi = dim_ >= 3 ? hi[2] : 0;
  for (int kx = lo[0]; kx <= hi[0]; ++kx)
    for (int ky = ky_lo; ky <= ky_hi; ++ky)
      for (int kz = kz_lo; kz <= kz_hi; ++kz) {
        std::size_t id = static_cast<std::size_t>(kx);
        if (dim_ >= 2) id = id * static_cast<std::size_t>(n_[1]) + static_cast<std::size_t>(ky);
        if (dim_ >= 3) id = id * static_cast<std::size_t>(n_[2]) + static_cast<std::size_t>(kz);
        const auto& cell = cells_[id];
        out.insert(out.end(), cell.begin(), cell.end());
      }
  std::sort(out.begin(), out.end());
}

double NeighborGrid::nearest_distance(const Vec& x, std::size_t skip) const {
  if (points_.empty() || (points_.size() == 1 && skip == 0))
    return std::numeric_limits<double>::infinity();
  std::vector<std::size_t> cand;
  double radius = cell_;
  const double max_radius = window_.diameter() + cell_;
  for (;;) {
    gather(x, radius, cand);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j : cand) {
      if (j == skip) continue;
      best = std::min(best, (points_[j] - x).norm());
    }
    // candidates within `radius` in max-norm cover the ball of that radius;
    // accept only when the winner is provably inside the searched region
    if (best <= radius) return best;
    if (radius > max_radius) return best;
    radius *= 2.0;
  }
}

}  // namespace cylk
