#pragma once
// Synthetic silhouette benchmark: a closed polyline silhouette is sampled
// uniformly by arc length for shape points and outliers, and each split's
// images are i.i.d. coordinate perturbations of that base configuration.
// The shape visits its points in a seeded random order, so the loop model
// cannot rely on silhouette structure.

#include <array>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace iso::bench {

struct SyntheticConfig {
  int n_shape = 25;
  int n_outliers = 0;
  double epsilon = 0.0; // perturbation range in pixels, per coordinate
  int n_images = 10;    // per split
  unsigned seed = 1;
  std::vector<Point2> silhouette; // closed polyline; empty -> default blob
  double width = 512.0, height = 512.0;

  void validate() const;
};

// Deterministic 200-vertex smoothed blob spanning the default 512x512 canvas.
std::vector<Point2> default_silhouette();

// Text file with one "x y" pair per line (the silhouette polyline).
std::vector<Point2> load_silhouette(const std::string& path);

struct SyntheticDataset {
  SyntheticConfig cfg;
  std::vector<std::size_t> order;           // template visiting order of shape points
  std::array<std::vector<Scene>, 3> splits; // train, val, test images
};

// Point indices [0, n_shape) are shape points, the rest outliers; every
// image carries both.  Identical seeds reproduce the dataset bit for bit.
SyntheticDataset gen_synthetic(const SyntheticConfig& cfg);

// All C(n_images, 2) template/target pairs within one split (i < j; the
// template reads its scene from image i).  Ground truth is the identity
// correspondence on shape points.
std::vector<MatchInstance> split_pairs(const SyntheticDataset& ds, int split);

} // namespace iso::bench
