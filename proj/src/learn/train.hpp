#pragma once
// Two-stage large-margin training.  Both stages minimise the regularised
// structured hinge
//
//   J(theta) = lambda/2 ||theta||^2
//            + (1/N) sum_i max(0, max_y [<h(y) - h(y_gt), theta> + loss(y, y_gt)])
//
// by stochastic subgradient descent with step 1/(lambda t), projection onto
// the ball ||theta|| <= 1/sqrt(lambda), and averaged iterates.  Stage 1
// learns the descriptor weights theta0 with one-to-one assignment as the
// inner maximisation; stage 2 fixes theta0, prunes each node to its p best
// candidates, calibrates per-group scale factors, and learns the clique
// group weights theta with loss-augmented loop decoding.
//
// All randomness (epoch shuffles, scale-factor sampling) is seeded, and
// batch subgradients are reduced in instance order, so a fixed seed and
// dataset reproduce the model bit for bit regardless of the job count.

#include <string>
#include <vector>

#include "core/model.hpp"
#include "core/types.hpp"
#include "features/clique.hpp"
#include "infer/map.hpp"
#include "infer/tables.hpp"

namespace iso::learn {

struct StageConfig {
  double lambda = 1e-4;
  std::vector<double> lambda_grid; // non-empty: pick by validation risk
  int epochs = 20;
};

struct TrainConfig {
  StageConfig stage1;
  StageConfig stage2;
  LossKind loss = LossKind::hamming;
  FeatureConfig features;
  int p = 10;             // candidates kept per node in stage 2
  bool inject_gt = false; // force the ground truth into pruned candidate sets
  unsigned seed = 1;
  int batch_size = 1; // instances per subgradient step
  int loopy_iters = 20;
  double loopy_tol = 1e-9;
  double degenerate_penalty = 10.0;
  int calib_samples = 4000; // candidate triples sampled per scale factor
  int jobs = 1;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;          // 1-based
  double objective = 0.0; // J at the averaged iterate
  double train_risk = 0.0;
  double val_risk = 0.0; // 0 when no validation instances were given
};

struct Stage1Result {
  std::vector<double> theta0;
  std::vector<EpochStats> history;
  double lambda = 0.0;
};

struct Stage2Result {
  WeightModel model; // complete: theta0, theta, p, config, scale factors
  std::vector<EpochStats> history;
  double lambda = 0.0;
  std::vector<double> prune_recall; // per training instance, before injection
  std::vector<double> slacks;       // final hinge value per training instance
  std::vector<double> train_losses; // loss of the final predictor, same space
};

struct TrainReport {
  Stage1Result stage1;
  Stage2Result stage2;
  std::vector<double> lambda1_risks; // validation risk per grid entry
  std::vector<double> lambda2_risks;
};

// Index of the grid entry with minimal validation risk; exact ties go to the
// larger lambda.  Errors on an empty grid or mismatched lengths.
std::size_t select_lambda(const std::vector<double>& grid, const std::vector<double>& risks);

// --- joint feature maps, h(S, U, y) ---------------------------------------

// Stage 1: minus the sum of per-point descriptor features (dimension k).
std::vector<double> joint_feature_unary(const TemplateShape& tpl, const Scene& target,
                                        const Assignment& y);

// Stage 2: minus the sum of scaled clique features around the loop
// (dimension = active group count; uses the context's scale factors).
std::vector<double> joint_feature_cliques(const feat::CliqueContext& ctx, const Assignment& y);

// --- column generation -----------------------------------------------------

struct ColumnGen {
  Assignment y_star;      // maximiser of score plus loss
  double violation = 0.0; // max(0, <h(y_star) - h(y_gt), theta> + loss)
};

ColumnGen column_generation_linear(const TemplateShape& tpl, const Scene& target,
                                   const Assignment& gt, const std::vector<double>& theta0,
                                   LossKind loss);

// Stage-2 column generation over a fixed candidate space.  Decoding uses the
// loop messages with the exact conditioned decoder as backstop, so the
// returned maximiser is exact.
ColumnGen column_generation_cliques(const feat::CliqueContext& ctx,
                                    const infer::CandidateSets& cands,
                                    const std::vector<double>& theta, const Assignment& gt,
                                    LossKind loss, const infer::LoopyOptions& opts = {});

// --- training --------------------------------------------------------------

// Reusable stage-1 state: per-instance descriptor feature tensors.  The
// instance vectors must outlive the problem.
class Stage1Problem {
public:
  Stage1Problem(const std::vector<MatchInstance>& train, const std::vector<MatchInstance>& val,
                const TrainConfig& cfg);
  Stage1Problem(Stage1Problem&&) noexcept;
  Stage1Problem& operator=(Stage1Problem&&) noexcept;
  ~Stage1Problem();

  Stage1Result train(double lambda) const;
  double risk(const std::vector<double>& theta0, bool validation) const;

private:
  struct Prepared;
  std::vector<Prepared> train_, val_;
  TrainConfig cfg_;
  std::size_t dim_ = 0;

  double mean_hinge(const std::vector<double>& theta0) const;
};

// Reusable stage-2 state: candidate sets, raw feature tables, calibrated
// scale factors, and ground-truth feature sums.  The instance vectors must
// outlive the problem.
class Stage2Problem {
public:
  Stage2Problem(const std::vector<MatchInstance>& train, const std::vector<MatchInstance>& val,
                std::vector<double> theta0, const TrainConfig& cfg);
  Stage2Problem(Stage2Problem&&) noexcept;
  Stage2Problem& operator=(Stage2Problem&&) noexcept;
  ~Stage2Problem();

  Stage2Result train(double lambda) const;
  double risk(const std::vector<double>& theta, bool validation) const;
  const std::vector<double>& scale_factors() const { return sf_; }
  std::vector<double> prune_recalls() const;

private:
  struct Prepared;
  std::vector<Prepared> train_, val_;
  TrainConfig cfg_;
  std::vector<double> theta0_, sf_;

  void calibrate_scale_factors();
  double mean_hinge(const std::vector<double>& theta) const;
};

Stage1Result train_stage1(const std::vector<MatchInstance>& train,
                          const std::vector<MatchInstance>& val, const TrainConfig& cfg);

Stage2Result train_stage2(const std::vector<MatchInstance>& train,
                          const std::vector<MatchInstance>& val, std::vector<double> theta0,
                          const TrainConfig& cfg);

// Stage 1 (with optional lambda grid), then stage 2 (likewise).
TrainReport two_stage_train(const std::vector<MatchInstance>& train,
                            const std::vector<MatchInstance>& val, const TrainConfig& cfg);

// CSV with header epoch,objective,train_risk,val_risk.
void write_risk_history(const std::vector<EpochStats>& history, const std::string& path);

} // namespace iso::learn
