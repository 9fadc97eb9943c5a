#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cylk/geometry.hpp"
#include "cylk/pattern.hpp"

namespace cylk {

enum class CorrectionKind { Translation, Combined };

// Function estimate on a strictly increasing argument grid, with enough
// metadata to reproduce the computation from the serialized form.
struct SummaryCurve {
  std::vector<double> args;
  std::vector<double> values;
  std::string statistic;
  std::optional<Vec> direction;
  std::optional<double> t;
  std::optional<double> r;
  std::optional<CorrectionKind> correction;
};

SummaryCurve make_curve(std::vector<double> args, std::vector<double> values,
                        std::string statistic);

void write_curve_csv(const SummaryCurve& c, const std::string& path);

// n(n-1)/|W|^2; requires n >= 2.
double rho2_hat(const PointPattern& p);

// Cylindrical K-function on an r grid at fixed half-height t, direction u.
// The Combined correction requires d = 3, an axis direction, and a window
// anchored at the origin. `accelerated = false` forces the naive O(n^2)
// reference path; both paths produce bit-identical sums.
SummaryCurve cylindrical_k(const PointPattern& p, const UnitVector& u,
                           const std::vector<double>& r_grid, double t,
                           CorrectionKind corr = CorrectionKind::Translation,
                           bool accelerated = true);

// K at fixed (r, t) as a function of the planar direction angle.
SummaryCurve directional_scan(const PointPattern& p, const std::vector<double>& phis,
                              double r, double t);

// Isotropic (disc/ball structuring element) K with translation correction.
SummaryCurve ripley_k(const PointPattern& p, const std::vector<double>& r_grid);

struct FgjResult {
  SummaryCurve F, G, J;
};

// Border-corrected (reduced-sample) F, G and the derived J on a common grid;
// F uses a regular lattice of at least `min_anchors` evaluation anchors.
FgjResult fgj_estimates(const PointPattern& p, const std::vector<double>& r_grid,
                        int min_anchors = 10000);

}  // namespace cylk
