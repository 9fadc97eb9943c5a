#pragma once

#include <vector>

#include "cylk/geometry.hpp"

namespace cylk {

// Uniform cell index over a box window for range and nearest-neighbour
// queries. Candidate lists come back sorted by point index so downstream
// summation order is reproducible.
class NeighborGrid {
 public:
  NeighborGrid(const std::vector<Vec>& points, const BoxWindow& window,
               double cell_size);

  // Indices of all points within `radius` of x in the max-norm sense
  // (callers re-check exact predicates), ascending.
  void gather(const Vec& x, double radius, std::vector<std::size_t>& out) const;

  // Euclidean nearest neighbour distance from x, skipping index `skip`
  // (pass npos to keep all points). Infinity when no eligible point exists.
  double nearest_distance(const Vec& x, std::size_t skip) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::size_t cell_of(const Vec& x) const;
  const std::vector<Vec>& points_;
  BoxWindow window_;
  double cell_;
  int n_[3] = {1, 1, 1};
  int dim_;
  std::vector<std::vector<std::size_t>> cells_;
};

}  // namespace cylk
