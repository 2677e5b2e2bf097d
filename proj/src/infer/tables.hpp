#pragma once
// Candidate sets and clique score tables.  Table i spans the candidates of
// nodes (i, i+1, i+2); its entries are scores (negated weighted features),
// optionally augmented by the per-node loss of node i, which is folded into
// the one clique where that node occupies the first slot.

#include <vector>

#include "assign/lap.hpp"
#include "core/model.hpp"
#include "core/types.hpp"
#include "features/clique.hpp"

namespace iso::infer {

struct CandidateSets {
  std::vector<std::vector<std::size_t>> lists; // per node, target point indices

  std::size_t n_nodes() const { return lists.size(); }
  void validate(std::size_t n_target) const;
};

CandidateSets all_candidates(std::size_t n_nodes, std::size_t n_targets);

// Per template point, the p target indices with the smallest collapsed unary
// cost <theta0, phi0>; ties broken by target index.  Lists are shorter than p
// only when the target scene has fewer than p points.
CandidateSets prune_candidates(const TemplateShape& tpl, const Scene& target,
                               const std::vector<double>& theta0, int p);

// Replace each list's worst-ranked candidate with the ground-truth target
// when it was pruned away (keeps list lengths <= p).
void inject_ground_truth(CandidateSets& cands, const Assignment& gt);

// Fraction of nodes whose ground-truth target survived pruning.
double ground_truth_recall(const CandidateSets& cands, const Assignment& gt);

// Unscaled per-group feature values for every clique and candidate triple:
// raw[i][((a*B + b)*C + c) * groups + g].
struct RawTables {
  std::size_t n = 0;
  std::size_t groups = 0;
  std::vector<std::size_t> sizes; // candidate count per node
  std::vector<std::vector<double>> raw;
};

RawTables compute_raw_tables(const feat::CliqueContext& ctx, const CandidateSets& cands);

struct CliqueTableSet {
  std::size_t n = 0;
  CandidateSets cands;
  std::vector<std::size_t> sizes;
  std::vector<std::vector<double>> t; // t[i] is sizes[i] x sizes[i+1] x sizes[i+2]

  double at(std::size_t i, std::size_t a, std::size_t b, std::size_t c) const {
    const std::size_t B = sizes[(i + 1) % n], C = sizes[(i + 2) % n];
    return t[i][(a * B + b) * C + c];
  }
};

// theta_scaled must hold theta[g] * scale_factor[g] per active group.
CliqueTableSet weight_tables(const RawTables& raw, const CandidateSets& cands,
                             const std::vector<double>& theta_scaled, const Scene& target,
                             const lap::LossAugment* aug = nullptr);

CliqueTableSet build_tables(const feat::CliqueContext& ctx, const CandidateSets& cands,
                            const std::vector<double>& theta,
                            const lap::LossAugment* aug = nullptr);

} // namespace iso::infer
