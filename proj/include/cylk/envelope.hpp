#pragma once

#include <vector>

#include "cylk/pattern.hpp"
#include "cylk/rng.hpp"
#include "cylk/summaries.hpp"

namespace cylk {

struct EnvelopeResult {
  SummaryCurve lower, upper;  // envelope band on the common grid
  SummaryCurve data;          // the data curve, for serialization
  double p_lower = 0.0;       // p-interval endpoints, multiples of 1/(s+1)
  double p_upper = 0.0;
  int data_rank = 0;          // 1 = most extreme among {data} + sims
};

// Global (simultaneous) rank envelope test. Curves are ordered by
// extreme-rank depth (pointwise ranks from below/above, mid-rank averaged
// over value ties, minimized over the grid), with depth ties broken by the
// extreme-rank-length refinement; exactly tying curves yield the p-interval.
// Requires all curves on the same grid and s large enough for the level
// (s + 1 >= 1/(1 - level)).
EnvelopeResult rank_envelope(const SummaryCurve& data,
                             const std::vector<SummaryCurve>& sims, double level);

// True when the data curve lies strictly outside the envelope band anywhere.
bool curve_exits(const EnvelopeResult& env);

// Statistic to evaluate per pattern inside envelope pipelines.
struct CurveStatistic {
  enum class Kind { CylindricalK, RipleyK, Ffun, Gfun, Jfun };
  Kind kind = Kind::CylindricalK;
  std::vector<double> grid;     // r grid
  Vec direction;                // CylindricalK only
  double t = 0.0;               // CylindricalK only
  CorrectionKind correction = CorrectionKind::Translation;
  int f_anchors = 10000;        // Ffun only
};

SummaryCurve eval_statistic(const PointPattern& p, const CurveStatistic& stat);

// Simulates `n_sims` binomial CSR patterns (fixed n matching the data) in
// the data window and runs the rank envelope for each statistic against the
// shared simulations. Simulation index i uses rng.substream(i).
std::vector<EnvelopeResult> csr_envelopes(const PointPattern& p,
                                          const std::vector<CurveStatistic>& stats,
                                          int n_sims, double level, RngStream& rng);

EnvelopeResult csr_envelope(const PointPattern& p, const CurveStatistic& stat,
                            int n_sims, double level, RngStream& rng);

void write_envelope_csv(const EnvelopeResult& env, const std::string& path);

}  // namespace cylk
