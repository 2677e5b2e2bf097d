#pragma once
// End-to-end matchers: template + target + model -> assignment.  The
// higher-order matcher prunes candidates with the collapsed unary cost and
// decodes the clique model; the linear matcher solves one assignment problem
// over the unary costs alone.

#include "core/model.hpp"
#include "core/types.hpp"
#include "infer/map.hpp"

namespace iso::infer {

struct Prediction {
  Assignment assignment;
  double objective = 0.0;
  int iterations = 0;
  bool converged = true;
  double gt_recall = -1.0; // candidate recall of the ground truth, -1 when unknown
};

// Full pipeline: prune to model.p candidates per node (all target points when
// the unary group is off), build clique tables, decode.  Passing gt fills
// gt_recall; it never alters the candidate sets.
Prediction predict(const TemplateShape& tpl, const Scene& target, const WeightModel& model,
                   const LoopyOptions& opts = {}, const Assignment* gt = nullptr);

// Linear baseline: one-to-one assignment maximising -<theta0, phi0>.
Prediction predict_linear(const TemplateShape& tpl, const Scene& target,
                          const std::vector<double>& theta0);

} // namespace iso::infer
