#pragma once
// Log-polar shape context histograms.  Distances are normalised by the
// scene's mean pairwise distance; radii below r_inner land in the innermost
// ring and radii beyond r_outer in the outermost, so every point is counted.

#include <vector>

#include "core/types.hpp"

namespace iso::feat {

struct ShapeContextConfig {
  int radial_bins = 5;
  int angular_bins = 12;
  double r_inner = 0.125; // in units of mean pairwise distance
  double r_outer = 2.0;

  void validate() const;
};

double mean_pairwise_distance(const std::vector<Point2>& points);

// Histogram over all points j != i, normalised to sum 1.  Layout is
// ring-major: entry r*angular_bins + a, with angular bin 0 starting at the
// positive x axis.
std::vector<double> shape_context(const Scene& scene, std::size_t i,
                                  const ShapeContextConfig& cfg);

// Copy of the scene whose descriptors are the shape context histograms of
// all its points (any existing descriptors are replaced).
Scene with_shape_context(const Scene& scene, const ShapeContextConfig& cfg);

// No-op when descriptors are already present.
inline Scene ensure_descriptors(const Scene& scene, const ShapeContextConfig& cfg) {
  return scene.has_descriptors() ? scene : with_shape_context(scene, cfg);
}

} // namespace iso::feat
