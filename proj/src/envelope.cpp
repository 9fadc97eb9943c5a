#include "cylk/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace cylk {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

EnvelopeResult rank_envelope(const SummaryCurve& data,
                             const std::vector<SummaryCurve>& sims, double level) {
  const std::size_t s = sims.size();
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("rank_envelope: level must be in (0, 1)");
  const std::size_t min_s =
      static_cast<std::size_t>(std::ceil(1.0 / (1.0 - level))) - 1;
  if (s < min_s)
    throw DataError("rank_envelope: need at least " + std::to_string(min_s) +
                    " simulations for level " + std::to_string(level));
  const std::size_t g = data.args.size();
  if (g == 0) throw DataError("rank_envelope: empty curves");
  for (const SummaryCurve& c : sims) {
    if (c.args.size() != g) throw DataError("rank_envelope: grid mismatch");
    for (std::size_t i = 0; i < g; ++i)
      if (c.args[i] != data.args[i]) throw DataError("rank_envelope: grid mismatch");
  }

  const std::size_t n = s + 1;  // curve 0 is the data
  auto value = [&](std::size_t curve, std::size_t pt) {
    return curve == 0 ? data.values[pt] : sims[curve - 1].values[pt];
  };

  // pointwise two-sided depths with mid-rank tie averaging
  std::vector<std::vector<double>> depth(n, std::vector<double>(g));
  {
    std::vector<double> col(n);
    std::vector<double> sorted(n);
    for (std::size_t pt = 0; pt < g; ++pt) {
      for (std::size_t i = 0; i < n; ++i) col[i] = value(i, pt);
      sorted = col;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 0; i < n; ++i) {
        const auto lo = std::lower_bound(sorted.begin(), sorted.end(), col[i]);
        const auto hi = std::upper_bound(sorted.begin(), sorted.end(), col[i]);
        const double below = static_cast<double>(lo - sorted.begin());
        const double above = static_cast<double>(sorted.end() - hi);
        const double ties = static_cast<double>(hi - lo) - 1.0;  // excluding self
        depth[i][pt] = std::min(below, above) + 0.5 * ties;
      }
    }
  }

  // extreme-rank-length keys: sorted pointwise depths, compared
  // lexicographically (primary key is the extreme rank itself)
  std::vector<std::vector<double>> key(n);
  for (std::size_t i = 0; i < n; ++i) {
    key[i] = depth[i];
    std::sort(key[i].begin(), key[i].end());
  }

  std::size_t strictly_lower = 0, ties = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (key[i] < key[0])
      ++strictly_lower;
    else if (key[i] == key[0])
      ++ties;
  }
  EnvelopeResult out;
  out.data = data;
  out.data_rank = static_cast<int>(strictly_lower) + 1;
  out.p_lower = static_cast<double>(strictly_lower + 1) / static_cast<double>(n);
  out.p_upper = static_cast<double>(strictly_lower + ties + 1) / static_cast<double>(n);

  // drop the k most extreme curves; a tie block straddling the cut is kept
  // whole so the construction is invariant to simulation relabeling
  const std::size_t k_drop =
      static_cast<std::size_t>(std::floor((1.0 - level) * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (key[a] != key[b]) return key[a] < key[b];
    return a < b;
  });
  std::vector<bool> dropped(n, false);
  if (k_drop > 0 && k_drop < n) {
    const std::vector<double>& cut = key[order[k_drop]];  // first kept key
    for (std::size_t r = 0; r < k_drop; ++r) {
      const std::size_t i = order[r];
      if (key[i] < cut) dropped[i] = true;
    }
  }

  std::vector<double> lo(g, std::numeric_limits<double>::infinity());
  std::vector<double> hi(g, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    if (dropped[i]) continue;
    for (std::size_t pt = 0; pt < g; ++pt) {
      lo[pt] = std::min(lo[pt], value(i, pt));
      hi[pt] = std::max(hi[pt], value(i, pt));
    }
  }
  out.lower = make_curve(data.args, std::move(lo), data.statistic + "_lower");
  out.upper = make_curve(data.args, std::move(hi), data.statistic + "_upper");
  return out;
}

bool curve_exits(const EnvelopeResult& env) {
  for (std::size_t i = 0; i < env.data.args.size(); ++i) {
    if (env.data.values[i] < env.lower.values[i] ||
        env.data.values[i] > env.upper.values[i])
      return true;
  }
  return false;
}

SummaryCurve eval_statistic(const PointPattern& p, const CurveStatistic& stat) {
  switch (stat.kind) {
    case CurveStatistic::Kind::CylindricalK:
      return cylindrical_k(p, UnitVector(stat.direction), stat.grid, stat.t,
                           stat.correction);
    case CurveStatistic::Kind::RipleyK:
      return ripley_k(p, stat.grid);
    case CurveStatistic::Kind::Ffun:
      return fgj_estimates(p, stat.grid, stat.f_anchors).F;
    case CurveStatistic::Kind::Gfun:
      return fgj_estimates(p, stat.grid, stat.f_anchors).G;
    case CurveStatistic::Kind::Jfun: {
      // J on a fixed grid: recompute and truncate-pad so grids always match
      FgjResult fgj = fgj_estimates(p, stat.grid, stat.f_anchors);
      std::vector<double> vals(stat.grid.size(), std::numeric_limits<double>::quiet_NaN());
      for (std::size_t i = 0; i < fgj.J.args.size(); ++i) vals[i] = fgj.J.values[i];
      // carry the last defined value forward to keep ranks well-defined
      for (std::size_t i = 1; i < vals.size(); ++i)
        if (std::isnan(vals[i])) vals[i] = vals[i - 1];
      if (!vals.empty() && std::isnan(vals[0]))
        throw DataError("eval_statistic: J undefined on the whole grid");
      return make_curve(stat.grid, std::move(vals), "J");
    }
  }
  throw std::invalid_argument("eval_statistic: unknown statistic");
}

std::vector<EnvelopeResult> csr_envelopes(const PointPattern& p,
                                          const std::vector<CurveStatistic>& stats,
                                          int n_sims, double level, RngStream& rng) {
  if (n_sims < 1) throw std::invalid_argument("csr_envelopes: n_sims must be >= 1");
  if (p.size() < 1) throw DataError("csr_envelopes: empty pattern");
  std::vector<std::vector<SummaryCurve>> sim_curves(stats.size());
  for (auto& v : sim_curves) v.reserve(static_cast<std::size_t>(n_sims));

  for (int sidx = 0; sidx < n_sims; ++sidx) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(sidx));
    std::vector<Vec> pts;
    pts.reserve(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      Vec x = Vec::zero(p.dim);
      for (int a = 0; a < p.dim; ++a)
        x[a] = sub.uniform(p.window.lower[a], p.window.upper[a]);
      pts.push_back(x);
    }
    const PointPattern sim(std::move(pts), p.window);
    for (std::size_t k = 0; k < stats.size(); ++k)
      sim_curves[k].push_back(eval_statistic(sim, stats[k]));
  }

  std::vector<EnvelopeResult> out;
  out.reserve(stats.size());
  for (std::size_t k = 0; k < stats.size(); ++k)
    out.push_back(rank_envelope(eval_statistic(p, stats[k]), sim_curves[k], level));
  return out;
}

EnvelopeResult csr_envelope(const PointPattern& p, const CurveStatistic& stat,
                            int n_sims, double level, RngStream& rng) {
  return csr_envelopes(p, {stat}, n_sims, level, rng).front();
}

void write_envelope_csv(const EnvelopeResult& env, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write envelope file: " + path);
  out << "# statistic: " << env.data.statistic << "\n";
  out << "# p_lower: " << fmt17(env.p_lower) << "\n";
  out << "# p_upper: " << fmt17(env.p_upper) << "\n";
  out << "# data_rank: " << env.data_rank << "\n";
  out << "arg,lower,upper,data\n";
  for (std::size_t i = 0; i < env.data.args.size(); ++i) {
    out << fmt17(env.data.args[i]) << "," << fmt17(env.lower.values[i]) << ","
        << fmt17(env.upper.values[i]) << "," << fmt17(env.data.values[i]) << "\n";
  }
}

}  // namespace cylk
