#include "features/shape_context.hpp"

#include <cmath>

namespace iso::feat {

void ShapeContextConfig::validate() const {
  if (radial_bins < 1 || angular_bins < 1)
    fail(ErrorCode::invalid, "shape context needs at least one radial and one angular bin");
  if (!(r_inner > 0.0) || !(r_outer > r_inner))
    fail(ErrorCode::invalid, "shape context radii must satisfy 0 < r_inner < r_outer");
}

double mean_pairwise_distance(const std::vector<Point2>& points) {
  const std::size_t n = points.size();
  if (n < 2) fail(ErrorCode::invalid, "mean pairwise distance needs at least 2 points");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) acc += dist(points[i], points[j]);
  return acc / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

std::vector<double> shape_context(const Scene& scene, std::size_t i,
                                  const ShapeContextConfig& cfg) {
  cfg.validate();
  const std::size_t n = scene.size();
  if (n < 2) fail(ErrorCode::invalid, "shape context needs a scene with at least 2 points");
  if (i >= n) fail(ErrorCode::invalid, "shape context point index out of range");
  const double mpd = mean_pairwise_distance(scene.points);
  if (!(mpd > 0.0)) fail(ErrorCode::degenerate, "shape context: all scene points coincide");

  const int rb = cfg.radial_bins, ab = cfg.angular_bins;
  // Log-spaced ring edges between r_inner and r_outer: rb+1 edges, rb rings.
  std::vector<double> edges(static_cast<std::size_t>(rb) + 1);
  const double lo = std::log(cfg.r_inner), hi = std::log(cfg.r_outer);
  for (int e = 0; e <= rb; ++e)
    edges[static_cast<std::size_t>(e)] = std::exp(lo + (hi - lo) * e / rb);

  std::vector<double> hist(static_cast<std::size_t>(rb * ab), 0.0);
  const Point2& c = scene.points[i];
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    const double r = dist(scene.points[j], c) / mpd;
    int rbin = rb - 1; // beyond r_outer: outermost ring
    if (r < edges[0]) {
      rbin = 0;        // inside r_inner: innermost ring
    } else {
      for (int e = 0; e < rb; ++e)
        if (r < edges[static_cast<std::size_t>(e) + 1]) { rbin = e; break; }
    }
    double theta = std::atan2(scene.points[j].y - c.y, scene.points[j].x - c.x);
    if (theta < 0.0) theta += 2.0 * M_PI;
    int abin = static_cast<int>(theta / (2.0 * M_PI) * ab);
    if (abin >= ab) abin = ab - 1; // theta == 2*pi after rounding
    hist[static_cast<std::size_t>(rbin * ab + abin)] += 1.0;
  }
  const double norm = 1.0 / static_cast<double>(n - 1);
  for (double& h : hist) h *= norm;
  return hist;
}

Scene with_shape_context(const Scene& scene, const ShapeContextConfig& cfg) {
  scene.validate();
  Scene out = scene;
  out.descriptors.clear();
  out.descriptors.reserve(scene.size());
  for (std::size_t i = 0; i < scene.size(); ++i)
    out.descriptors.push_back(shape_context(scene, i, cfg));
  return out;
}

} // namespace iso::feat
