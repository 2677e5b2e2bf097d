#include "learn/loss.hpp"

namespace iso::learn {

double hamming_loss(const Assignment& y, const Assignment& y_gt) {
  if (y.size() != y_gt.size() || y.size() == 0)
    fail(ErrorCode::dimension, "hamming loss: assignment sizes differ (" +
                                   std::to_string(y.size()) + " vs " +
                                   std::to_string(y_gt.size()) + ")");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y.map[i] != y_gt.map[i]) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(y.size());
}

double endpoint_loss(const Assignment& y, const Assignment& y_gt, const Scene& target) {
  if (y.size() != y_gt.size() || y.size() == 0)
    fail(ErrorCode::dimension, "endpoint loss: assignment sizes differ");
  y.validate(y.size(), target.size());
  y_gt.validate(y.size(), target.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    acc += dist(target.points[y.map[i]], target.points[y_gt.map[i]]);
  return acc / (target.width * static_cast<double>(y.size()));
}

} // namespace iso::learn
