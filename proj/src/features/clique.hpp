#pragma once
// Third-order clique features.  Clique i of an n-point template couples the
// cyclically consecutive points (i, i+1, i+2).  Its feature vector has one
// entry per active group, in the fixed order
//   [ collapsed unary,  distance pair sum,  adjacency pair sum,
//     scaled distance pair sum,  angle ],
// where the pair sums run over the clique's two template edges (i,i+1) and
// (i,i+2).  Each group is multiplied by its model scale factor.  Geometric
// groups whose point triple is degenerate (coincident points) take the
// model's finite penalty value instead of an infinite cost.

#include <array>

#include "core/model.hpp"
#include "core/types.hpp"
#include "features/delaunay.hpp"

namespace iso::feat {

// Everything about a (template, target, model) triple that does not depend
// on the candidate assignment: widths, Delaunay graphs, collapsed unary
// costs, and per-clique template-side geometry.
struct CliqueContext {
  const TemplateShape* tpl = nullptr;
  const Scene* target = nullptr;
  FeatureConfig config;
  std::vector<double> scale_factors; // per active group
  double penalty = 10.0;
  double tpl_width = 0.0;
  double tgt_width = 0.0;

  AdjacencyGraph tpl_adj, tgt_adj; // filled iff config.adjacency
  std::vector<double> unary;       // [i * |target| + u], filled iff config.unary

  struct TplClique {
    double d1a = 0.0, d1b = 0.0; // scaled template distances (i,i+1), (i,i+2)
    double d2a = 0.0, d2b = 0.0; // mean-scaled distances for both orderings
    double ang = 0.0;            // angle at the middle point
    bool deg_scaled = false;     // template triple coincident
    bool deg_angle = false;      // middle point coincides with an endpoint
    bool edge_a = false, edge_b = false; // template Delaunay edges
  };
  std::vector<TplClique> tpl_cliques;

  std::size_t n_nodes() const { return tpl->size(); }
  double unary_cost(std::size_t i, std::size_t u) const {
    return unary[i * target->size() + u];
  }
};

// Validates dimensions (descriptors if unary is active) and precomputes the
// template-side tables.  The context holds pointers into tpl/target, which
// must outlive it.
CliqueContext make_clique_context(const TemplateShape& tpl, const Scene& target,
                                  const WeightModel& model);

// n x |target| matrix of <theta0, phi0(s_i, u)>, shared by candidate pruning
// and the linear matcher.
std::vector<double> unary_cost_matrix(const TemplateShape& tpl, const Scene& target,
                                      const std::vector<double>& theta0);

// Raw (unscaled) group values for clique i under candidate target indices
// (yi, yi1, yi2).  Fills out[0..active) in group order; returns the count.
std::size_t clique_groups_raw(const CliqueContext& ctx, std::size_t i, std::size_t yi,
                              std::size_t yi1, std::size_t yi2,
                              std::array<double, FeatureConfig::group_count>& out);

// Scaled feature vector (one entry per active group).
std::vector<double> clique_feature(const CliqueContext& ctx, std::size_t i, std::size_t yi,
                                   std::size_t yi1, std::size_t yi2);

} // namespace iso::feat
