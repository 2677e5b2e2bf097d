#include "learn/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>

#include "assign/lap.hpp"
#include "features/geometry.hpp"
#include "learn/loss.hpp"
#include "util/parallel.hpp"

namespace iso::learn {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// theta <- (1 - 1/t) theta - eta g, then project onto ||theta|| <= 1/sqrt(lambda).
void pegasos_step(std::vector<double>& theta, const std::vector<double>& g, double lambda,
                  long t) {
  const double eta = 1.0 / (lambda * static_cast<double>(t));
  const double keep = 1.0 - 1.0 / static_cast<double>(t);
  for (std::size_t d = 0; d < theta.size(); ++d) theta[d] = keep * theta[d] - eta * g[d];
  const double radius = 1.0 / std::sqrt(lambda);
  const double nrm = norm(theta);
  if (nrm > radius)
    for (double& v : theta) v *= radius / nrm;
}

double assignment_loss(LossKind kind, const Assignment& y, const Assignment& gt,
                       const Scene& target) {
  return kind == LossKind::hamming ? hamming_loss(y, gt) : endpoint_loss(y, gt, target);
}

void require_ground_truth(const std::vector<MatchInstance>& data, const char* which) {
  for (const MatchInstance& inst : data) {
    if (!inst.ground_truth)
      fail(ErrorCode::invalid, std::string(which) + " instance missing ground truth");
    inst.ground_truth->validate(inst.tpl.size(), inst.target.size());
  }
}

} // namespace

void TrainConfig::validate() const {
  for (const StageConfig* s : {&stage1, &stage2}) {
    if (!(s->lambda > 0) || !std::isfinite(s->lambda))
      fail(ErrorCode::invalid, "lambda must be positive");
    for (double l : s->lambda_grid)
      if (!(l > 0) || !std::isfinite(l)) fail(ErrorCode::invalid, "lambda grid entries must be positive");
    if (s->epochs < 1) fail(ErrorCode::invalid, "epochs must be >= 1");
  }
  if (p < 1) fail(ErrorCode::invalid, "p must be >= 1");
  if (batch_size < 1) fail(ErrorCode::invalid, "batch_size must be >= 1");
  if (loopy_iters < 1) fail(ErrorCode::invalid, "loopy_iters must be >= 1");
  if (!(loopy_tol > 0)) fail(ErrorCode::invalid, "loopy_tol must be positive");
  if (!(degenerate_penalty >= 0) || !std::isfinite(degenerate_penalty))
    fail(ErrorCode::invalid, "degenerate_penalty must be finite and non-negative");
  if (calib_samples < 1) fail(ErrorCode::invalid, "calib_samples must be >= 1");
  if (jobs < 1) fail(ErrorCode::invalid, "jobs must be >= 1");
  if (features.active_groups() == 0) fail(ErrorCode::invalid, "no active feature groups");
}

std::size_t select_lambda(const std::vector<double>& grid, const std::vector<double>& risks) {
  if (grid.empty()) fail(ErrorCode::invalid, "empty lambda grid");
  if (grid.size() != risks.size())
    fail(ErrorCode::invalid, "lambda grid and risk list differ in length");
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (risks[i] < risks[best] || (risks[i] == risks[best] && grid[i] > grid[best])) best = i;
  return best;
}

std::vector<double> joint_feature_unary(const TemplateShape& tpl, const Scene& target,
                                        const Assignment& y) {
  if (y.size() != tpl.size()) fail(ErrorCode::dimension, "assignment size does not match template");
  if (!tpl.scene.has_descriptors() || !target.has_descriptors())
    fail(ErrorCode::invalid, "descriptors required for the unary joint feature");
  std::vector<double> h(tpl.scene.descriptor_dim(), 0.0);
  for (std::size_t i = 0; i < tpl.size(); ++i) {
    const std::vector<double> f = feat::phi0(tpl.descriptor(i), target.descriptors[y.map[i]]);
    for (std::size_t d = 0; d < h.size(); ++d) h[d] -= f[d];
  }
  return h;
}

std::vector<double> joint_feature_cliques(const feat::CliqueContext& ctx, const Assignment& y) {
  const std::size_t n = ctx.n_nodes();
  if (y.size() != n) fail(ErrorCode::dimension, "assignment size does not match template");
  std::vector<double> h(ctx.scale_factors.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> f = feat::clique_feature(ctx, i, y.map[i], y.map[ctx.tpl->next(i)],
                                                       y.map[ctx.tpl->next2(i)]);
    for (std::size_t g = 0; g < h.size(); ++g) h[g] -= f[g];
  }
  return h;
}

ColumnGen column_generation_linear(const TemplateShape& tpl, const Scene& target,
                                   const Assignment& gt, const std::vector<double>& theta0,
                                   LossKind loss) {
  gt.validate(tpl.size(), target.size());
  const lap::LossAugment aug{loss, &gt};
  const lap::CostMatrix scores = lap::unary_scores(tpl, target, theta0, &aug);
  ColumnGen out;
  out.y_star = lap::solve_lap(scores);
  const double best = lap::assignment_score(scores, out.y_star);
  const double gt_score = dot(joint_feature_unary(tpl, target, gt), theta0);
  out.violation = std::max(0.0, best - gt_score);
  return out;
}

ColumnGen column_generation_cliques(const feat::CliqueContext& ctx,
                                    const infer::CandidateSets& cands,
                                    const std::vector<double>& theta, const Assignment& gt,
                                    LossKind loss, const infer::LoopyOptions& opts) {
  gt.validate(ctx.n_nodes(), ctx.target->size());
  if (theta.size() != ctx.scale_factors.size())
    fail(ErrorCode::dimension, "theta size does not match active feature groups");
  const infer::RawTables raw = infer::compute_raw_tables(ctx, cands);
  std::vector<double> theta_scaled(theta.size());
  for (std::size_t g = 0; g < theta.size(); ++g) theta_scaled[g] = theta[g] * ctx.scale_factors[g];
  const lap::LossAugment aug{loss, &gt};
  const infer::CliqueTableSet tables =
      infer::weight_tables(raw, cands, theta_scaled, *ctx.target, &aug);
  infer::InferenceResult res = infer::map_loopy(tables, opts);
  if (!res.converged) res = infer::map_conditioned(tables);
  ColumnGen out;
  out.y_star = res.assignment;
  const double gt_score = dot(joint_feature_cliques(ctx, gt), theta);
  out.violation = std::max(0.0, res.objective - gt_score);
  return out;
}

// --------------------------------------------------------------------------
// Stage 1

struct Stage1Problem::Prepared {
  const MatchInstance* inst = nullptr;
  std::size_t n = 0, m = 0, k = 0;
  std::vector<double> phi0;     // (i*m + u)*k + d
  std::vector<double> loss_mat; // i*m + u, per-node augmentation values
  std::vector<double> u_gt;     // sum of phi0 rows along the ground truth

  lap::CostMatrix scores(const std::vector<double>& theta0, bool augment) const {
    lap::CostMatrix s = lap::make_cost_matrix(n, m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t u = 0; u < m; ++u) {
        const double* f = phi0.data() + (i * m + u) * k;
        double acc = 0.0;
        for (std::size_t d = 0; d < k; ++d) acc += theta0[d] * f[d];
        s.at(i, u) = -acc + (augment ? loss_mat[i * m + u] : 0.0);
      }
    return s;
  }

  std::vector<double> feature_sum(const Assignment& y) const {
    std::vector<double> u(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* f = phi0.data() + (i * m + y.map[i]) * k;
      for (std::size_t d = 0; d < k; ++d) u[d] += f[d];
    }
    return u;
  }
};

Stage1Problem::Stage1Problem(Stage1Problem&&) noexcept = default;
Stage1Problem& Stage1Problem::operator=(Stage1Problem&&) noexcept = default;
Stage1Problem::~Stage1Problem() = default;

Stage1Problem::Stage1Problem(const std::vector<MatchInstance>& train,
                             const std::vector<MatchInstance>& val, const TrainConfig& cfg)
    : cfg_(cfg) {
  cfg_.validate();
  if (train.empty()) fail(ErrorCode::invalid, "empty training set");
  require_ground_truth(train, "training");
  require_ground_truth(val, "validation");

  auto prepare = [&](const MatchInstance& inst) {
    inst.tpl.validate();
    inst.target.validate();
    if (!inst.tpl.scene.has_descriptors() || !inst.target.has_descriptors())
      fail(ErrorCode::invalid, "descriptors required to learn descriptor weights");
    Prepared p;
    p.inst = &inst;
    p.n = inst.tpl.size();
    p.m = inst.target.size();
    p.k = inst.tpl.scene.descriptor_dim();
    if (inst.target.descriptor_dim() != p.k)
      fail(ErrorCode::dimension, "template and target descriptor dimensions differ");
    if (dim_ == 0) dim_ = p.k;
    if (p.k != dim_) fail(ErrorCode::dimension, "descriptor dimension differs across instances");
    p.phi0.resize(p.n * p.m * p.k);
    p.loss_mat.resize(p.n * p.m);
    const Assignment& gt = *inst.ground_truth;
    for (std::size_t i = 0; i < p.n; ++i)
      for (std::size_t u = 0; u < p.m; ++u) {
        const std::vector<double> f =
            feat::phi0(inst.tpl.descriptor(i), inst.target.descriptors[u]);
        std::copy(f.begin(), f.end(), p.phi0.begin() + (i * p.m + u) * p.k);
        p.loss_mat[i * p.m + u] = node_loss(cfg_.loss, u, gt.map[i], inst.target, p.n);
      }
    p.u_gt = p.feature_sum(gt);
    return p;
  };
  for (const MatchInstance& inst : train) train_.push_back(prepare(inst));
  for (const MatchInstance& inst : val) val_.push_back(prepare(inst));
}

double Stage1Problem::risk(const std::vector<double>& theta0, bool validation) const {
  const std::vector<Prepared>& set = validation ? val_ : train_;
  if (set.empty()) return 0.0;
  std::vector<double> losses(set.size(), 0.0);
  util::parallel_for(set.size(), cfg_.jobs, [&](std::size_t i) {
    const Prepared& p = set[i];
    const Assignment y = lap::solve_lap_raw(p.scores(theta0, false));
    losses[i] = assignment_loss(cfg_.loss, y, *p.inst->ground_truth, p.inst->target);
  });
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(set.size());
}

double Stage1Problem::mean_hinge(const std::vector<double>& theta0) const {
  std::vector<double> viols(train_.size(), 0.0);
  util::parallel_for(train_.size(), cfg_.jobs, [&](std::size_t i) {
    const Prepared& p = train_[i];
    const lap::CostMatrix s = p.scores(theta0, true);
    const Assignment y = lap::solve_lap_raw(s);
    viols[i] = std::max(0.0, lap::assignment_score(s, y) + dot(p.u_gt, theta0));
  });
  return std::accumulate(viols.begin(), viols.end(), 0.0) /
         static_cast<double>(train_.size());
}

Stage1Result Stage1Problem::train(double lambda) const {
  const std::size_t N = train_.size(), K = dim_;
  std::vector<double> theta(K, 0.0), avg(K, 0.0);
  long t = 0, n_avg = 0;
  std::mt19937 rng(cfg_.seed);
  std::vector<std::size_t> perm(N);
  std::iota(perm.begin(), perm.end(), 0);

  Stage1Result out;
  out.lambda = lambda;
  std::vector<std::vector<double>> grads(N);
  std::vector<char> active(N);
  for (int epoch = 1; epoch <= cfg_.stage1.epochs; ++epoch) {
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t start = 0; start < N; start += cfg_.batch_size) {
      const std::size_t stop = std::min(N, start + cfg_.batch_size);
      util::parallel_for(stop - start, cfg_.jobs, [&](std::size_t slot) {
        const Prepared& p = train_[perm[start + slot]];
        const lap::CostMatrix s = p.scores(theta, true);
        const Assignment y = lap::solve_lap_raw(s);
        const double viol = lap::assignment_score(s, y) + dot(p.u_gt, theta);
        active[slot] = viol > 0;
        if (viol > 0) {
          grads[slot] = p.feature_sum(y); // U(y*)
          for (std::size_t d = 0; d < K; ++d) grads[slot][d] = p.u_gt[d] - grads[slot][d];
        }
      });
      std::vector<double> g(K, 0.0);
      for (std::size_t slot = 0; slot < stop - start; ++slot)
        if (active[slot])
          for (std::size_t d = 0; d < K; ++d) g[d] += grads[slot][d];
      const double inv = 1.0 / static_cast<double>(stop - start);
      for (double& v : g) v *= inv;
      pegasos_step(theta, g, lambda, ++t);
      for (std::size_t d = 0; d < K; ++d) avg[d] += theta[d];
      ++n_avg;
    }
    std::vector<double> bar(K);
    for (std::size_t d = 0; d < K; ++d) bar[d] = avg[d] / static_cast<double>(n_avg);
    EpochStats st;
    st.epoch = epoch;
    st.objective = 0.5 * lambda * dot(bar, bar) + mean_hinge(bar);
    st.train_risk = risk(bar, false);
    st.val_risk = val_.empty() ? 0.0 : risk(bar, true);
    out.history.push_back(st);
  }
  out.theta0.resize(K);
  for (std::size_t d = 0; d < K; ++d) out.theta0[d] = avg[d] / static_cast<double>(n_avg);
  return out;
}

// --------------------------------------------------------------------------
// Stage 2

struct Stage2Problem::Prepared {
  const MatchInstance* inst = nullptr;
  feat::CliqueContext ctx; // scale factors inside are placeholders (all 1)
  infer::CandidateSets cands;
  infer::RawTables raw;
  std::vector<double> f_gt; // scaled clique feature sums of the ground truth
  double recall = 1.0;

  // Scaled feature sums F(y); <h(y), theta> == -<F(y), theta>.
  std::vector<double> feature_sum(const Assignment& y, const std::vector<double>& sf) const {
    std::vector<double> f(sf.size(), 0.0);
    std::array<double, FeatureConfig::group_count> vals{};
    for (std::size_t i = 0; i < ctx.n_nodes(); ++i) {
      feat::clique_groups_raw(ctx, i, y.map[i], y.map[ctx.tpl->next(i)],
                              y.map[ctx.tpl->next2(i)], vals);
      for (std::size_t g = 0; g < f.size(); ++g) f[g] += sf[g] * vals[g];
    }
    return f;
  }
};

Stage2Problem::Stage2Problem(Stage2Problem&&) noexcept = default;
Stage2Problem& Stage2Problem::operator=(Stage2Problem&&) noexcept = default;
Stage2Problem::~Stage2Problem() = default;

Stage2Problem::Stage2Problem(const std::vector<MatchInstance>& train,
                             const std::vector<MatchInstance>& val, std::vector<double> theta0,
                             const TrainConfig& cfg)
    : cfg_(cfg), theta0_(std::move(theta0)) {
  cfg_.validate();
  if (train.empty()) fail(ErrorCode::invalid, "empty training set");
  require_ground_truth(train, "training");
  require_ground_truth(val, "validation");

  const std::size_t groups = cfg_.features.active_groups();
  WeightModel proto;
  proto.theta0 = theta0_;
  proto.theta.assign(groups, 1.0);
  proto.p = cfg_.p;
  proto.config = cfg_.features;
  proto.scale_factors.assign(groups, 1.0);
  proto.degenerate_penalty = cfg_.degenerate_penalty;

  auto prepare = [&](const MatchInstance& inst, bool training) {
    Prepared p;
    p.inst = &inst;
    p.ctx = feat::make_clique_context(inst.tpl, inst.target, proto);
    p.cands = cfg_.features.unary
                  ? infer::prune_candidates(inst.tpl, inst.target, theta0_, cfg_.p)
                  : infer::all_candidates(inst.tpl.size(), inst.target.size());
    p.recall = infer::ground_truth_recall(p.cands, *inst.ground_truth);
    if (training && cfg_.inject_gt) infer::inject_ground_truth(p.cands, *inst.ground_truth);
    p.raw = infer::compute_raw_tables(p.ctx, p.cands);
    return p;
  };
  for (const MatchInstance& inst : train) train_.push_back(prepare(inst, true));
  for (const MatchInstance& inst : val) val_.push_back(prepare(inst, false));

  calibrate_scale_factors();
  for (Prepared& p : train_) p.f_gt = p.feature_sum(*p.inst->ground_truth, sf_);
  for (Prepared& p : val_) p.f_gt = p.feature_sum(*p.inst->ground_truth, sf_);
}

// One factor per group: 1/std of the raw group values over a seeded sample
// of uniform target triples, so every group enters the score at a comparable
// magnitude.  Sampling ignores the candidate lists so the factors describe
// the feature groups themselves, independent of the pruning parameter.
// Constant groups get factor 1.
void Stage2Problem::calibrate_scale_factors() {
  const std::size_t groups = cfg_.features.active_groups();
  std::seed_seq seq{cfg_.seed, 0x5ca1eu};
  std::mt19937 rng(seq);
  std::vector<double> sum(groups, 0.0), sumsq(groups, 0.0);
  const long samples = cfg_.calib_samples;
  std::uniform_int_distribution<std::size_t> pick_inst(0, train_.size() - 1);
  std::array<double, FeatureConfig::group_count> vals{};
  for (long s = 0; s < samples; ++s) {
    const Prepared& p = train_[pick_inst(rng)];
    const std::size_t n = p.raw.n;
    const std::size_t i = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    std::uniform_int_distribution<std::size_t> pick_pt(0, p.inst->target.size() - 1);
    const std::size_t a = pick_pt(rng), b = pick_pt(rng), c = pick_pt(rng);
    feat::clique_groups_raw(p.ctx, i, a, b, c, vals);
    for (std::size_t g = 0; g < groups; ++g) {
      sum[g] += vals[g];
      sumsq[g] += vals[g] * vals[g];
    }
  }
  sf_.assign(groups, 1.0);
  for (std::size_t g = 0; g < groups; ++g) {
    const double mean = sum[g] / static_cast<double>(samples);
    const double var = std::max(0.0, sumsq[g] / static_cast<double>(samples) - mean * mean);
    const double sd = std::sqrt(var);
    if (sd >= 1e-12) sf_[g] = 1.0 / sd;
  }
}

std::vector<double> Stage2Problem::prune_recalls() const {
  std::vector<double> r;
  r.reserve(train_.size());
  for (const Prepared& p : train_) r.push_back(p.recall);
  return r;
}

namespace {

struct CliqueCG {
  Assignment y_star;
  double violation = 0.0; // un-clamped
};

// Most violated assignment over one instance's candidate space, decoded
// exactly (loop messages with the conditioned decoder as backstop).
CliqueCG clique_cg(const infer::RawTables& raw, const infer::CandidateSets& cands,
                   const Scene& target, const Assignment& gt,
                   const std::vector<double>& theta_scaled, double gt_dot, LossKind loss,
                   const infer::LoopyOptions& opts) {
  const lap::LossAugment aug{loss, &gt};
  const infer::CliqueTableSet tables = infer::weight_tables(raw, cands, theta_scaled, target, &aug);
  infer::InferenceResult res = infer::map_loopy(tables, opts);
  if (!res.converged) res = infer::map_conditioned(tables);
  return {res.assignment, res.objective + gt_dot};
}

} // namespace

double Stage2Problem::risk(const std::vector<double>& theta, bool validation) const {
  const std::vector<Prepared>& set = validation ? val_ : train_;
  if (set.empty()) return 0.0;
  std::vector<double> theta_scaled(theta.size());
  for (std::size_t g = 0; g < theta.size(); ++g) theta_scaled[g] = theta[g] * sf_[g];
  infer::LoopyOptions opts;
  opts.max_iters = cfg_.loopy_iters;
  opts.tol = cfg_.loopy_tol;
  std::vector<double> losses(set.size(), 0.0);
  util::parallel_for(set.size(), cfg_.jobs, [&](std::size_t i) {
    const Prepared& p = set[i];
    const infer::CliqueTableSet tables =
        infer::weight_tables(p.raw, p.cands, theta_scaled, p.inst->target);
    const infer::InferenceResult res = infer::map_loopy(tables, opts);
    losses[i] = assignment_loss(cfg_.loss, res.assignment, *p.inst->ground_truth,
                                p.inst->target);
  });
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(set.size());
}

double Stage2Problem::mean_hinge(const std::vector<double>& theta) const {
  std::vector<double> theta_scaled(theta.size());
  for (std::size_t g = 0; g < theta.size(); ++g) theta_scaled[g] = theta[g] * sf_[g];
  infer::LoopyOptions opts;
  opts.max_iters = cfg_.loopy_iters;
  opts.tol = cfg_.loopy_tol;
  std::vector<double> viols(train_.size(), 0.0);
  util::parallel_for(train_.size(), cfg_.jobs, [&](std::size_t i) {
    const Prepared& p = train_[i];
    const CliqueCG cg = clique_cg(p.raw, p.cands, p.inst->target, *p.inst->ground_truth,
                                  theta_scaled, dot(p.f_gt, theta), cfg_.loss, opts);
    viols[i] = std::max(0.0, cg.violation);
  });
  return std::accumulate(viols.begin(), viols.end(), 0.0) /
         static_cast<double>(train_.size());
}

Stage2Result Stage2Problem::train(double lambda) const {
  const std::size_t N = train_.size(), G = sf_.size();
  std::vector<double> theta(G, 1.0), avg(G, 0.0);
  long t = 0, n_avg = 0;
  std::mt19937 rng(cfg_.seed);
  std::vector<std::size_t> perm(N);
  std::iota(perm.begin(), perm.end(), 0);
  infer::LoopyOptions opts;
  opts.max_iters = cfg_.loopy_iters;
  opts.tol = cfg_.loopy_tol;

  Stage2Result out;
  out.lambda = lambda;
  std::vector<std::vector<double>> grads(N);
  std::vector<char> active(N);
  std::vector<double> theta_scaled(G);
  for (int epoch = 1; epoch <= cfg_.stage2.epochs; ++epoch) {
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t start = 0; start < N; start += cfg_.batch_size) {
      const std::size_t stop = std::min(N, start + cfg_.batch_size);
      for (std::size_t g = 0; g < G; ++g) theta_scaled[g] = theta[g] * sf_[g];
      util::parallel_for(stop - start, cfg_.jobs, [&](std::size_t slot) {
        const Prepared& p = train_[perm[start + slot]];
        const CliqueCG cg = clique_cg(p.raw, p.cands, p.inst->target, *p.inst->ground_truth,
                                      theta_scaled, dot(p.f_gt, theta), cfg_.loss, opts);
        active[slot] = cg.violation > 0;
        if (cg.violation > 0) {
          grads[slot] = p.feature_sum(cg.y_star, sf_); // F(y*)
          for (std::size_t g = 0; g < G; ++g) grads[slot][g] = p.f_gt[g] - grads[slot][g];
        }
      });
      std::vector<double> g(G, 0.0);
      for (std::size_t slot = 0; slot < stop - start; ++slot)
        if (active[slot])
          for (std::size_t d = 0; d < G; ++d) g[d] += grads[slot][d];
      const double inv = 1.0 / static_cast<double>(stop - start);
      for (double& v : g) v *= inv;
      pegasos_step(theta, g, lambda, ++t);
      for (std::size_t d = 0; d < G; ++d) avg[d] += theta[d];
      ++n_avg;
    }
    std::vector<double> bar(G);
    for (std::size_t d = 0; d < G; ++d) bar[d] = avg[d] / static_cast<double>(n_avg);
    EpochStats st;
    st.epoch = epoch;
    st.objective = 0.5 * lambda * dot(bar, bar) + mean_hinge(bar);
    st.train_risk = risk(bar, false);
    st.val_risk = val_.empty() ? 0.0 : risk(bar, true);
    out.history.push_back(st);
  }

  std::vector<double> bar(G);
  for (std::size_t d = 0; d < G; ++d) bar[d] = avg[d] / static_cast<double>(n_avg);
  out.model.theta0 = theta0_;
  out.model.theta = bar;
  out.model.p = cfg_.p;
  out.model.config = cfg_.features;
  out.model.scale_factors = sf_;
  out.model.degenerate_penalty = cfg_.degenerate_penalty;
  out.prune_recall = prune_recalls();

  // Final per-instance slacks and predictor losses over the same candidate
  // spaces, both decoded exactly.
  for (std::size_t g = 0; g < G; ++g) theta_scaled[g] = bar[g] * sf_[g];
  out.slacks.resize(N);
  out.train_losses.resize(N);
  util::parallel_for(N, cfg_.jobs, [&](std::size_t i) {
    const Prepared& p = train_[i];
    const lap::LossAugment aug{cfg_.loss, &*p.inst->ground_truth};
    const infer::CliqueTableSet aug_tables =
        infer::weight_tables(p.raw, p.cands, theta_scaled, p.inst->target, &aug);
    out.slacks[i] =
        std::max(0.0, infer::map_conditioned(aug_tables).objective + dot(p.f_gt, bar));
    const infer::CliqueTableSet tables =
        infer::weight_tables(p.raw, p.cands, theta_scaled, p.inst->target);
    const Assignment y = infer::map_conditioned(tables).assignment;
    out.train_losses[i] =
        assignment_loss(cfg_.loss, y, *p.inst->ground_truth, p.inst->target);
  });
  return out;
}

// --------------------------------------------------------------------------
// Pipeline

Stage1Result train_stage1(const std::vector<MatchInstance>& train,
                          const std::vector<MatchInstance>& val, const TrainConfig& cfg) {
  return Stage1Problem(train, val, cfg).train(cfg.stage1.lambda);
}

Stage2Result train_stage2(const std::vector<MatchInstance>& train,
                          const std::vector<MatchInstance>& val, std::vector<double> theta0,
                          const TrainConfig& cfg) {
  return Stage2Problem(train, val, std::move(theta0), cfg).train(cfg.stage2.lambda);
}

TrainReport two_stage_train(const std::vector<MatchInstance>& train,
                            const std::vector<MatchInstance>& val, const TrainConfig& cfg) {
  cfg.validate();
  TrainReport report;

  Stage1Problem p1(train, val, cfg);
  if (cfg.stage1.lambda_grid.empty()) {
    report.stage1 = p1.train(cfg.stage1.lambda);
  } else {
    if (val.empty()) fail(ErrorCode::invalid, "lambda selection needs validation instances");
    std::vector<Stage1Result> results;
    for (double lambda : cfg.stage1.lambda_grid) {
      results.push_back(p1.train(lambda));
      report.lambda1_risks.push_back(p1.risk(results.back().theta0, true));
    }
    report.stage1 = results[select_lambda(cfg.stage1.lambda_grid, report.lambda1_risks)];
  }

  Stage2Problem p2(train, val, report.stage1.theta0, cfg);
  if (cfg.stage2.lambda_grid.empty()) {
    report.stage2 = p2.train(cfg.stage2.lambda);
  } else {
    if (val.empty()) fail(ErrorCode::invalid, "lambda selection needs validation instances");
    std::vector<Stage2Result> results;
    for (double lambda : cfg.stage2.lambda_grid) {
      results.push_back(p2.train(lambda));
      report.lambda2_risks.push_back(p2.risk(results.back().model.theta, true));
    }
    report.stage2 =
        std::move(results[select_lambda(cfg.stage2.lambda_grid, report.lambda2_risks)]);
  }
  return report;
}

void write_risk_history(const std::vector<EpochStats>& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write " + path);
  out << std::setprecision(17) << "epoch,objective,train_risk,val_risk\n";
  for (const EpochStats& st : history)
    out << st.epoch << ',' << st.objective << ',' << st.train_risk << ',' << st.val_risk
        << '\n';
  if (!out.good()) fail(ErrorCode::io, "failed writing " + path);
}

} // namespace iso::learn
