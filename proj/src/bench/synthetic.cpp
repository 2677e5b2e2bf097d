#include "bench/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "core/error.hpp"

namespace iso::bench {

void SyntheticConfig::validate() const {
  if (n_shape < 3) fail(ErrorCode::invalid, "n_shape must be >= 3");
  if (n_outliers < 0) fail(ErrorCode::invalid, "n_outliers must be >= 0");
  if (!(epsilon >= 0) || !std::isfinite(epsilon))
    fail(ErrorCode::invalid, "epsilon must be finite and >= 0");
  if (n_images < 2) fail(ErrorCode::invalid, "n_images must be >= 2");
  if (!(width > 0) || !(height > 0)) fail(ErrorCode::invalid, "canvas extents must be positive");
}

std::vector<Point2> default_silhouette() {
  // Crenellated keep: a flat base with identical battlements repeated along
  // the top.  The repetition makes distant stretches of the outline look
  // locally alike, so first-order descriptors alias across teeth and the
  // benchmark genuinely needs global geometry; the taller right-most merlon
  // breaks the outline's mirror symmetry.
  constexpr double x0 = 70.0, x1 = 442.0, yb = 130.0, yw = 330.0, ym = 382.0;
  constexpr int teeth = 8;
  constexpr double period = (x1 - x0) / teeth;
  std::vector<Point2> corners;
  corners.push_back({x0, yb});
  corners.push_back({x1, yb});
  corners.push_back({x1, yw});
  for (int k = 0; k < teeth; ++k) {
    const double xr = x1 - k * period;
    const double xm = xr - 0.5 * period;
    const double top = (k == 0) ? 420.0 : ym;
    corners.push_back({xm, yw});
    corners.push_back({xm, top});
    corners.push_back({xr - period, top});
    corners.push_back({xr - period, yw});
  }
  // the closing edge (left wall down to the first corner) is implicit

  // resample the closed outline to 200 evenly spaced vertices
  constexpr int vertices = 200;
  const std::size_t c = corners.size();
  std::vector<double> cum(c + 1, 0.0);
  for (std::size_t i = 0; i < c; ++i) {
    const Point2 a = corners[i], b = corners[(i + 1) % c];
    cum[i + 1] = cum[i] + std::hypot(b.x - a.x, b.y - a.y);
  }
  std::vector<Point2> poly;
  poly.reserve(vertices);
  std::size_t seg = 0;
  for (int k = 0; k < vertices; ++k) {
    const double s = cum[c] * k / vertices;
    while (seg + 1 < c && cum[seg + 1] <= s) ++seg;
    const Point2 a = corners[seg], b = corners[(seg + 1) % c];
    const double t = (s - cum[seg]) / std::max(cum[seg + 1] - cum[seg], 1e-12);
    poly.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
  }
  return poly;
}

std::vector<Point2> load_silhouette(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open " + path);
  std::vector<Point2> poly;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    Point2 p{};
    if (!(row >> p.x >> p.y))
      fail(ErrorCode::parse, path + ":" + std::to_string(lineno) + ": expected 'x y'");
    poly.push_back(p);
  }
  if (poly.size() < 3) fail(ErrorCode::invalid, path + ": a silhouette needs >= 3 vertices");
  return poly;
}

namespace {

// Point at arc-length position t along the closed polyline.
struct ArcSampler {
  const std::vector<Point2>& poly;
  std::vector<double> cumulative; // cumulative[e] = length up to the end of edge e
  double total = 0.0;

  explicit ArcSampler(const std::vector<Point2>& polyline) : poly(polyline) {
    cumulative.reserve(poly.size());
    for (std::size_t e = 0; e < poly.size(); ++e) {
      total += dist(poly[e], poly[(e + 1) % poly.size()]);
      cumulative.push_back(total);
    }
    if (!(total > 0)) fail(ErrorCode::degenerate, "silhouette has zero length");
  }

  Point2 at(double t) const {
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), t);
    const std::size_t e = std::min<std::size_t>(it - cumulative.begin(), poly.size() - 1);
    const double start = e == 0 ? 0.0 : cumulative[e - 1];
    const double len = cumulative[e] - start;
    const double frac = len > 0 ? (t - start) / len : 0.0;
    const Point2& a = poly[e];
    const Point2& b = poly[(e + 1) % poly.size()];
    return {a.x + frac * (b.x - a.x), a.y + frac * (b.y - a.y)};
  }
};

} // namespace

SyntheticDataset gen_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  SyntheticDataset ds;
  ds.cfg = cfg;
  const std::vector<Point2> poly = cfg.silhouette.empty() ? default_silhouette() : cfg.silhouette;
  const ArcSampler sampler(poly);
  std::mt19937 rng(cfg.seed);
  std::uniform_real_distribution<double> arc(0.0, sampler.total);

  // Base configuration: arc-sorted shape points, then arc-sorted outliers.
  auto sample_sorted = [&](int count) {
    std::vector<double> ts(count);
    for (double& t : ts) t = arc(rng);
    std::sort(ts.begin(), ts.end());
    std::vector<Point2> pts;
    pts.reserve(count);
    for (double t : ts) pts.push_back(sampler.at(t));
    return pts;
  };
  std::vector<Point2> base = sample_sorted(cfg.n_shape);
  const std::vector<Point2> outliers = sample_sorted(cfg.n_outliers);
  base.insert(base.end(), outliers.begin(), outliers.end());

  ds.order.resize(cfg.n_shape);
  std::iota(ds.order.begin(), ds.order.end(), 0);
  std::shuffle(ds.order.begin(), ds.order.end(), rng);

  std::uniform_real_distribution<double> jitter(-cfg.epsilon / 2.0, cfg.epsilon / 2.0);
  static const char* split_names[] = {"train", "val", "test"};
  for (int s = 0; s < 3; ++s) {
    ds.splits[s].reserve(cfg.n_images);
    for (int img = 0; img < cfg.n_images; ++img) {
      Scene scene;
      scene.id = std::string("syn_") + split_names[s] + "_" + std::to_string(img);
      scene.width = cfg.width;
      scene.height = cfg.height;
      scene.points = base;
      if (cfg.epsilon > 0)
        for (Point2& p : scene.points) {
          p.x += jitter(rng);
          p.y += jitter(rng);
        }
      ds.splits[s].push_back(std::move(scene));
    }
  }
  return ds;
}

std::vector<MatchInstance> split_pairs(const SyntheticDataset& ds, int split) {
  if (split < 0 || split > 2) fail(ErrorCode::invalid, "split must be 0, 1, or 2");
  const std::vector<Scene>& images = ds.splits[split];
  Assignment gt;
  gt.map.reserve(ds.order.size());
  for (std::size_t t : ds.order) gt.map.push_back(t);

  std::vector<MatchInstance> pairs;
  pairs.reserve(images.size() * (images.size() - 1) / 2);
  for (std::size_t i = 0; i < images.size(); ++i)
    for (std::size_t j = i + 1; j < images.size(); ++j) {
      MatchInstance inst;
      inst.tpl.scene = images[i];
      inst.tpl.order = ds.order;
      inst.target = images[j];
      inst.ground_truth = gt;
      inst.tpl.validate();
      pairs.push_back(std::move(inst));
    }
  return pairs;
}

} // namespace iso::bench
