#pragma once
// Domain types: 2-D points, scenes (landmark sets with optional per-point
// descriptors), ordered template shapes, and point assignments.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace iso {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline bool operator==(const Point2& a, const Point2& b) { return a.x == b.x && a.y == b.y; }

inline double dist(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

// A set of landmark points in an image of known extent.  Descriptors are
// either absent entirely or present for every point with a common dimension.
struct Scene {
  std::string id;
  double width = 0.0;
  double height = 0.0;
  std::vector<Point2> points;
  std::vector<std::string> point_ids;                // parallel to points (may be empty)
  std::vector<std::vector<double>> descriptors;      // empty, or one row per point

  std::size_t size() const { return points.size(); }
  bool has_descriptors() const { return !descriptors.empty(); }
  std::size_t descriptor_dim() const { return descriptors.empty() ? 0 : descriptors.front().size(); }

  void validate() const; // throws Error on violated invariants
};

// An ordered cyclic subset of a scene's points.  Index arithmetic on the loop
// wraps: the neighbour of the last point is the first.
struct TemplateShape {
  Scene scene;
  std::vector<std::size_t> order; // distinct indices into scene.points, size >= 3

  std::size_t size() const { return order.size(); }
  std::size_t next(std::size_t i) const { return (i + 1) % order.size(); }
  std::size_t next2(std::size_t i) const { return (i + 2) % order.size(); }
  const Point2& point(std::size_t i) const { return scene.points[order[i]]; }
  const std::vector<double>& descriptor(std::size_t i) const { return scene.descriptors[order[i]]; }

  void validate() const;
};

// Maps every template point to a target point index.  Not necessarily
// injective; collisions() counts repeated targets as a diagnostic.
struct Assignment {
  std::vector<std::size_t> map;

  std::size_t size() const { return map.size(); }
  std::size_t collisions() const;
  void validate(std::size_t n_template, std::size_t n_target) const;
};

bool operator==(const Assignment& a, const Assignment& b);

// One matching problem: a template, a target scene, and (for training or
// evaluation) the known correct assignment.
struct MatchInstance {
  TemplateShape tpl;
  Scene target;
  std::optional<Assignment> ground_truth;
};

} // namespace iso
