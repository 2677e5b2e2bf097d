#include "core/types.hpp"

#include <algorithm>
#include <unordered_set>

namespace iso {

void Scene::validate() const {
  if (points.empty()) fail(ErrorCode::invalid, "scene '" + id + "' has no points");
  if (!(width > 0.0) || !(height > 0.0))
    fail(ErrorCode::invalid, "scene '" + id + "' needs positive width and height");
  for (const Point2& p : points)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      fail(ErrorCode::invalid, "scene '" + id + "' has a non-finite coordinate");
  if (!point_ids.empty() && point_ids.size() != points.size())
    fail(ErrorCode::internal, "scene '" + id + "' point id list out of sync");
  if (!descriptors.empty()) {
    if (descriptors.size() != points.size())
      fail(ErrorCode::dimension, "scene '" + id + "' has descriptors for only some points");
    const std::size_t k = descriptors.front().size();
    if (k == 0) fail(ErrorCode::dimension, "scene '" + id + "' has zero-length descriptors");
    for (const auto& d : descriptors) {
      if (d.size() != k)
        fail(ErrorCode::dimension, "scene '" + id + "' has inconsistent descriptor dimension");
      for (double v : d)
        if (!std::isfinite(v))
          fail(ErrorCode::invalid, "scene '" + id + "' has a non-finite descriptor value");
    }
  }
}

void TemplateShape::validate() const {
  scene.validate();
  if (order.size() < 3)
    fail(ErrorCode::invalid, "template needs at least 3 ordered points, got " +
                                 std::to_string(order.size()));
  std::unordered_set<std::size_t> seen;
  for (std::size_t idx : order) {
    if (idx >= scene.size())
      fail(ErrorCode::invalid, "template order index " + std::to_string(idx) +
                                   " out of range for scene of " + std::to_string(scene.size()));
    if (!seen.insert(idx).second)
      fail(ErrorCode::invalid, "template order repeats index " + std::to_string(idx));
  }
}

std::size_t Assignment::collisions() const {
  std::vector<std::size_t> sorted = map;
  std::sort(sorted.begin(), sorted.end());
  const auto distinct = std::unique(sorted.begin(), sorted.end()) - sorted.begin();
  return map.size() - static_cast<std::size_t>(distinct);
}

void Assignment::validate(std::size_t n_template, std::size_t n_target) const {
  if (map.size() != n_template)
    fail(ErrorCode::dimension, "assignment covers " + std::to_string(map.size()) +
                                   " template points, expected " + std::to_string(n_template));
  for (std::size_t u : map)
    if (u >= n_target)
      fail(ErrorCode::invalid, "assignment target index " + std::to_string(u) +
                                   " out of range for scene of " + std::to_string(n_target));
}

bool operator==(const Assignment& a, const Assignment& b) { return a.map == b.map; }

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::io: return "io";
    case ErrorCode::parse: return "parse";
    case ErrorCode::invalid: return "invalid";
    case ErrorCode::dimension: return "dimension";
    case ErrorCode::degenerate: return "degenerate";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::internal: return "internal";
  }
  return "unknown";
}

} // namespace iso
