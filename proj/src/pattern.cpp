#include "cylk/pattern.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cylk {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void parse_fail(const std::string& path, int line, int col,
                             const std::string& what) {
  std::ostringstream os;
  os << path << ":" << line << ":" << col << ": " << what;
  throw DataError(os.str());
}

}  // namespace

PointPattern::PointPattern(std::vector<Vec> pts, const BoxWindow& win)
    : dim(win.dim()), points(std::move(pts)), window(win) {
  std::string offenders;
  int bad = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].dim != dim)
      throw DataError("PointPattern: point dimension does not match window");
    if (!window.contains(points[i])) {
      if (bad < 5) {
        offenders += (bad ? ", " : "") + std::string("#") + std::to_string(i);
      }
      ++bad;
    }
  }
  if (bad > 0)
    throw DataError("PointPattern: " + std::to_string(bad) +
                    " point(s) outside the window (" + offenders + ")");
}

double translation_overlap(const BoxWindow& w, const Vec& shift) {
  double v = 1.0;
  for (int i = 0; i < w.dim(); ++i) {
    const double s = w.side(i) - std::abs(shift[i]);
    if (s <= 0.0) return 0.0;
    v *= s;
  }
  return v;
}

namespace {

PointPattern read_pattern_impl(const std::string& path, const BoxWindow* override_window) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pattern file: " + path);

  std::string line;
  int lineno = 0;
  bool have_window = false;
  std::vector<double> wbounds;
  std::vector<Vec> pts;
  int dim = 0;
  bool header_seen = false;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("window:");
      if (pos != std::string::npos) {
        std::istringstream ws(line.substr(pos + 7));
        double v;
        while (ws >> v) wbounds.push_back(v);
        have_window = true;
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      int cols = 1;
      for (char ch : line)
        if (ch == ',') ++cols;
      if (cols != 2 && cols != 3) parse_fail(path, lineno, 1, "expected 2 or 3 columns");
      dim = cols;
      continue;
    }
    Vec p = Vec::zero(dim);
    std::istringstream ls(line);
    std::string field;
    int col = 0;
    while (std::getline(ls, field, ',')) {
      if (col >= dim) parse_fail(path, lineno, col + 1, "too many fields");
      try {
        std::size_t used = 0;
        p[col] = std::stod(field, &used);
        if (used == 0) throw std::invalid_argument("empty");
      } catch (const std::exception&) {
        parse_fail(path, lineno, col + 1, "cannot parse number '" + field + "'");
      }
      ++col;
    }
    if (col != dim) parse_fail(path, lineno, col + 1, "too few fields");
    pts.push_back(p);
  }
  if (!header_seen) throw DataError(path + ": missing header row");
  if (override_window) {
    if (override_window->dim() != dim)
      throw DataError(path + ": window dimension does not match columns");
    return PointPattern(std::move(pts), *override_window);
  }
  if (!have_window) throw DataError(path + ": no '# window:' comment and no explicit window");
  if (static_cast<int>(wbounds.size()) != 2 * dim)
    throw DataError(path + ": window comment has wrong arity for dim " + std::to_string(dim));
  Vec lo = Vec::zero(dim), hi = Vec::zero(dim);
  for (int i = 0; i < dim; ++i) {
    lo[i] = wbounds[static_cast<std::size_t>(2 * i)];
    hi[i] = wbounds[static_cast<std::size_t>(2 * i + 1)];
  }
  return PointPattern(std::move(pts), BoxWindow(lo, hi));
}

}  // namespace

PointPattern read_pattern_csv(const std::string& path) {
  return read_pattern_impl(path, nullptr);
}

PointPattern read_pattern_csv(const std::string& path, const BoxWindow& window) {
  return read_pattern_impl(path, &window);
}

void write_pattern_csv(const PointPattern& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write pattern file: " + path);
  out << "# window:";
  for (int i = 0; i < p.dim; ++i)
    out << " " << fmt17(p.window.lower[i]) << " " << fmt17(p.window.upper[i]);
  out << "\n";
  out << (p.dim == 2 ? "x,y" : "x,y,z") << "\n";
  for (const Vec& q : p.points) {
    for (int i = 0; i < p.dim; ++i) out << (i ? "," : "") << fmt17(q[i]);
    out << "\n";
  }
}

BoxWindow read_window_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open window file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  const int dim = j.at("dim").get<int>();
  Vec lo = Vec::zero(dim), hi = Vec::zero(dim);
  for (int i = 0; i < dim; ++i) {
    lo[i] = j.at("lower").at(static_cast<std::size_t>(i)).get<double>();
    hi[i] = j.at("upper").at(static_cast<std::size_t>(i)).get<double>();
  }
  return BoxWindow(lo, hi);
}

void write_window_json(const BoxWindow& w, const std::string& path) {
  json j;
  j["dim"] = w.dim();
  for (int i = 0; i < w.dim(); ++i) {
    j["lower"].push_back(w.lower[i]);
    j["upper"].push_back(w.upper[i]);
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write window file: " + path);
  out << j.dump(2) << "\n";
}

namespace {

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.dim; ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from_json(const json& a) {
  const int d = static_cast<int>(a.size());
  Vec v = Vec::zero(d);
  for (int i = 0; i < d; ++i) v[i] = a.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

}  // namespace

void write_latent_json(const LatentRealization& lat, const std::string& path) {
  json j;
  j["lines"] = json::array();
  for (const DirectedLine& l : lat.lines) {
    json e;
    e["y"] = vec_to_json(l.anchor);
    e["u"] = vec_to_json(l.direction.vec());
    j["lines"].push_back(e);
  }
  j["parents"] = json::array();
  for (const auto& v : lat.parents) {
    json a = json::array();
    for (const Vec& q : v) a.push_back(vec_to_json(q));
    j["parents"].push_back(a);
  }
  j["displaced"] = json::array();
  for (const auto& v : lat.displaced) {
    json a = json::array();
    for (const Vec& q : v) a.push_back(vec_to_json(q));
    j["displaced"].push_back(a);
  }
  j["window"] = {{"dim", lat.pattern.dim}};
  for (int i = 0; i < lat.pattern.dim; ++i) {
    j["window"]["lower"].push_back(lat.pattern.window.lower[i]);
    j["window"]["upper"].push_back(lat.pattern.window.upper[i]);
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write latent file: " + path);
  out << j.dump() << "\n";
}

LatentRealization read_latent_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open latent file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  const int dim = j.at("window").at("dim").get<int>();
  Vec lo = Vec::zero(dim), hi = Vec::zero(dim);
  for (int i = 0; i < dim; ++i) {
    lo[i] = j["window"]["lower"].at(static_cast<std::size_t>(i)).get<double>();
    hi[i] = j["window"]["upper"].at(static_cast<std::size_t>(i)).get<double>();
  }
  std::vector<DirectedLine> lines;
  for (const auto& e : j.at("lines")) {
    lines.emplace_back(vec_from_json(e.at("y")), UnitVector(vec_from_json(e.at("u"))));
  }
  std::vector<std::vector<Vec>> parents, displaced;
  if (j.contains("parents"))
    for (const auto& a : j["parents"]) {
      std::vector<Vec> v;
      for (const auto& q : a) v.push_back(vec_from_json(q));
      parents.push_back(std::move(v));
    }
  if (j.contains("displaced"))
    for (const auto& a : j["displaced"]) {
      std::vector<Vec> v;
      for (const auto& q : a) v.push_back(vec_from_json(q));
      displaced.push_back(std::move(v));
    }
  return LatentRealization{std::move(lines), std::move(parents), std::move(displaced),
                           PointPattern({}, BoxWindow(lo, hi))};
}

}  // namespace cylk
