#include "infer/tables.hpp"

#include <algorithm>
#include <numeric>

#include "learn/loss.hpp"

namespace iso::infer {

void CandidateSets::validate(std::size_t n_target) const {
  if (lists.size() < 3) fail(ErrorCode::invalid, "candidate sets need at least 3 nodes");
  for (const auto& l : lists) {
    if (l.empty()) fail(ErrorCode::invalid, "a node has an empty candidate list");
    for (std::size_t u : l)
      if (u >= n_target) fail(ErrorCode::invalid, "candidate target index out of range");
    std::vector<std::size_t> sorted(l);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      fail(ErrorCode::invalid, "duplicate candidate in a node's list");
  }
}

CandidateSets all_candidates(std::size_t n_nodes, std::size_t n_targets) {
  CandidateSets c;
  c.lists.resize(n_nodes);
  for (auto& l : c.lists) {
    l.resize(n_targets);
    std::iota(l.begin(), l.end(), 0);
  }
  return c;
}

CandidateSets prune_candidates(const TemplateShape& tpl, const Scene& target,
                               const std::vector<double>& theta0, int p) {
  if (p < 1) fail(ErrorCode::invalid, "candidate count p must be at least 1");
  const std::vector<double> costs = feat::unary_cost_matrix(tpl, target, theta0);
  const std::size_t n = tpl.size(), m = target.size();
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(p), m);
  CandidateSets out;
  out.lists.resize(n);
  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < n; ++i) {
    std::iota(idx.begin(), idx.end(), 0);
    const double* row = costs.data() + i * m;
    std::stable_sort(idx.begin(), idx.end(),
                     [row](std::size_t a, std::size_t b) { return row[a] < row[b]; });
    out.lists[i].assign(idx.begin(), idx.begin() + static_cast<long>(keep));
  }
  return out;
}

void inject_ground_truth(CandidateSets& cands, const Assignment& gt) {
  if (gt.size() != cands.n_nodes())
    fail(ErrorCode::dimension, "ground truth size does not match candidate sets");
  for (std::size_t i = 0; i < cands.n_nodes(); ++i) {
    auto& l = cands.lists[i];
    if (std::find(l.begin(), l.end(), gt.map[i]) == l.end()) l.back() = gt.map[i];
  }
}

double ground_truth_recall(const CandidateSets& cands, const Assignment& gt) {
  if (gt.size() != cands.n_nodes())
    fail(ErrorCode::dimension, "ground truth size does not match candidate sets");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < cands.n_nodes(); ++i) {
    const auto& l = cands.lists[i];
    if (std::find(l.begin(), l.end(), gt.map[i]) != l.end()) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(cands.n_nodes());
}

RawTables compute_raw_tables(const feat::CliqueContext& ctx, const CandidateSets& cands) {
  const std::size_t n = ctx.n_nodes();
  if (cands.n_nodes() != n) fail(ErrorCode::dimension, "candidate sets do not match template size");
  cands.validate(ctx.target->size());

  RawTables rt;
  rt.n = n;
  rt.groups = ctx.config.active_groups();
  rt.sizes.resize(n);
  for (std::size_t i = 0; i < n; ++i) rt.sizes[i] = cands.lists[i].size();
  rt.raw.resize(n);
  std::array<double, FeatureConfig::group_count> buf{};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ca = cands.lists[i];
    const auto& cb = cands.lists[(i + 1) % n];
    const auto& cc = cands.lists[(i + 2) % n];
    rt.raw[i].resize(ca.size() * cb.size() * cc.size() * rt.groups);
    std::size_t w = 0;
    for (std::size_t a = 0; a < ca.size(); ++a)
      for (std::size_t b = 0; b < cb.size(); ++b)
        for (std::size_t c = 0; c < cc.size(); ++c) {
          clique_groups_raw(ctx, i, ca[a], cb[b], cc[c], buf);
          for (std::size_t g = 0; g < rt.groups; ++g) rt.raw[i][w++] = buf[g];
        }
  }
  return rt;
}

CliqueTableSet weight_tables(const RawTables& raw, const CandidateSets& cands,
                             const std::vector<double>& theta_scaled, const Scene& target,
                             const lap::LossAugment* aug) {
  if (theta_scaled.size() != raw.groups)
    fail(ErrorCode::dimension, "theta dimension does not match raw feature groups");
  const std::size_t n = raw.n;
  CliqueTableSet ts;
  ts.n = n;
  ts.cands = cands;
  ts.sizes = raw.sizes;
  ts.t.resize(n);
  const std::size_t G = raw.groups;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t entries = raw.raw[i].size() / G;
    ts.t[i].resize(entries);
    const double* src = raw.raw[i].data();
    for (std::size_t e = 0; e < entries; ++e) {
      double acc = 0.0;
      for (std::size_t g = 0; g < G; ++g) acc += theta_scaled[g] * src[e * G + g];
      ts.t[i][e] = -acc;
    }
    if (aug != nullptr) {
      // Node i's loss rides on every entry of clique i, keyed by slot a.
      if (aug->gt == nullptr) fail(ErrorCode::invalid, "loss augmentation needs a ground truth");
      const auto& ca = cands.lists[i];
      const std::size_t BC = ts.sizes[(i + 1) % n] * ts.sizes[(i + 2) % n];
      for (std::size_t a = 0; a < ca.size(); ++a) {
        const double l = learn::node_loss(aug->kind, ca[a], aug->gt->map[i], target, n);
        if (l != 0.0)
          for (std::size_t e = a * BC; e < (a + 1) * BC; ++e) ts.t[i][e] += l;
      }
    }
  }
  return ts;
}

CliqueTableSet build_tables(const feat::CliqueContext& ctx, const CandidateSets& cands,
                            const std::vector<double>& theta, const lap::LossAugment* aug) {
  if (theta.size() != ctx.config.active_groups())
    fail(ErrorCode::dimension, "theta has dimension " + std::to_string(theta.size()) +
                                   " but the feature configuration activates " +
                                   std::to_string(ctx.config.active_groups()) + " groups");
  std::vector<double> theta_scaled(theta.size());
  for (std::size_t g = 0; g < theta.size(); ++g) theta_scaled[g] = theta[g] * ctx.scale_factors[g];
  const RawTables rt = compute_raw_tables(ctx, cands);
  return weight_tables(rt, cands, theta_scaled, *ctx.target, aug);
}

} // namespace iso::infer
