#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "cylk/geometry.hpp"

namespace cylk {

// Malformed input data: parse failures, points outside the window,
// insufficient points for an estimator.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid run configuration (CLI / JSON level).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PointPattern {
  int dim;
  std::vector<Vec> points;
  BoxWindow window;

  PointPattern(std::vector<Vec> pts, const BoxWindow& win);
  std::size_t size() const { return points.size(); }
};

// CSV with an axis-naming header and a `# window: lo1 hi1 ...` comment.
// A window passed explicitly overrides the file comment.
PointPattern read_pattern_csv(const std::string& path);
PointPattern read_pattern_csv(const std::string& path, const BoxWindow& window);
void write_pattern_csv(const PointPattern& p, const std::string& path);

// JSON window descriptor {"dim": d, "lower": [...], "upper": [...]}.
BoxWindow read_window_json(const std::string& path);
void write_window_json(const BoxWindow& w, const std::string& path);

// |W \cap W_shift| for a box window.
double translation_overlap(const BoxWindow& w, const Vec& shift);

// Latent structure of one simulated realization: lines, the points laid on
// them, and the displaced points (before clipping to the window).
struct LatentRealization {
  std::vector<DirectedLine> lines;
  std::vector<std::vector<Vec>> parents;    // per line
  std::vector<std::vector<Vec>> displaced;  // per line, same shape as parents
  PointPattern pattern;
};

void write_latent_json(const LatentRealization& lat, const std::string& path);
// Reads lines only (parents/displaced restored when present).
LatentRealization read_latent_json(const std::string& path);

}  // namespace cylk
