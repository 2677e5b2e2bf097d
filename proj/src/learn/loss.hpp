#pragma once
// Assignment losses.  Both decompose over template points, which is what the
// loss-augmented score matrices and clique tables rely on.

#include "core/model.hpp"
#include "core/types.hpp"

namespace iso::learn {

// Fraction of template points matched to the wrong target point.
double hamming_loss(const Assignment& y, const Assignment& y_gt);

// Mean Euclidean distance from the predicted target point to the correct
// one, divided by the target scene width.
double endpoint_loss(const Assignment& y, const Assignment& y_gt, const Scene& target);

// Contribution of one template point (out of n) choosing target u when the
// truth is gt_u.  Summing node_loss over all points gives the full loss.
inline double node_loss(LossKind kind, std::size_t u, std::size_t gt_u, const Scene& target,
                        std::size_t n) {
  if (kind == LossKind::hamming) return u == gt_u ? 0.0 : 1.0 / static_cast<double>(n);
  return dist(target.points[u], target.points[gt_u]) /
         (target.width * static_cast<double>(n));
}

} // namespace iso::learn
