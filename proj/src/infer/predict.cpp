#include "infer/predict.hpp"

#include "assign/lap.hpp"
#include "features/clique.hpp"
#include "infer/tables.hpp"

namespace iso::infer {

Prediction predict(const TemplateShape& tpl, const Scene& target, const WeightModel& model,
                   const LoopyOptions& opts, const Assignment* gt) {
  model.validate();
  const feat::CliqueContext ctx = feat::make_clique_context(tpl, target, model);
  CandidateSets cands = model.config.unary
                            ? prune_candidates(tpl, target, model.theta0, model.p)
                            : all_candidates(tpl.size(), target.size());
  Prediction out;
  if (gt) out.gt_recall = ground_truth_recall(cands, *gt);
  const CliqueTableSet tables = build_tables(ctx, cands, model.theta);
  const InferenceResult res = map_loopy(tables, opts);
  out.assignment = res.assignment;
  out.objective = res.objective;
  out.iterations = res.iterations;
  out.converged = res.converged;
  return out;
}

Prediction predict_linear(const TemplateShape& tpl, const Scene& target,
                          const std::vector<double>& theta0) {
  const lap::CostMatrix scores = lap::unary_scores(tpl, target, theta0);
  Prediction out;
  out.assignment = lap::solve_lap_raw(scores);
  out.objective = lap::assignment_score(scores, out.assignment);
  return out;
}

} // namespace iso::infer
