#include "features/clique.hpp"

#include <cmath>

#include "features/geometry.hpp"

namespace iso::feat {

std::vector<double> unary_cost_matrix(const TemplateShape& tpl, const Scene& target,
                                      const std::vector<double>& theta0) {
  if (!tpl.scene.has_descriptors() || !target.has_descriptors())
    fail(ErrorCode::invalid, "unary features need descriptors on both scenes "
                             "(compute shape context first)");
  if (tpl.scene.descriptor_dim() != target.descriptor_dim() ||
      theta0.size() != tpl.scene.descriptor_dim())
    fail(ErrorCode::dimension,
         "descriptor dimensions disagree: template " + std::to_string(tpl.scene.descriptor_dim()) +
             ", target " + std::to_string(target.descriptor_dim()) + ", theta0 " +
             std::to_string(theta0.size()));
  const std::size_t n = tpl.size(), m = target.size();
  std::vector<double> costs(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double>& s = tpl.descriptor(i);
    for (std::size_t u = 0; u < m; ++u)
      costs[i * m + u] = collapse_unary(theta0, s, target.descriptors[u]);
  }
  return costs;
}

CliqueContext make_clique_context(const TemplateShape& tpl, const Scene& target,
                                  const WeightModel& model) {
  tpl.validate();
  target.validate();
  model.validate();

  CliqueContext ctx;
  ctx.tpl = &tpl;
  ctx.target = &target;
  ctx.config = model.config;
  ctx.scale_factors = model.scale_factors;
  ctx.penalty = model.degenerate_penalty;
  ctx.tpl_width = tpl.scene.width;
  ctx.tgt_width = target.width;

  if (model.config.unary) ctx.unary = unary_cost_matrix(tpl, target, model.theta0);
  if (model.config.adjacency) {
    ctx.tpl_adj = delaunay(tpl.scene.points);
    ctx.tgt_adj = delaunay(target.points);
  }

  const std::size_t n = tpl.size();
  ctx.tpl_cliques.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t i1 = tpl.next(i), i2 = tpl.next2(i);
    const Point2 &a = tpl.point(i), &b = tpl.point(i1), &c = tpl.point(i2);
    CliqueContext::TplClique& t = ctx.tpl_cliques[i];
    const double dab = dist(a, b), dbc = dist(b, c), dac = dist(a, c);
    t.d1a = dab / ctx.tpl_width;
    t.d1b = dac / ctx.tpl_width;
    const double mean = (dab + dbc + dac) / 3.0;
    t.deg_scaled = !(mean > 0.0);
    if (!t.deg_scaled) {
      t.d2a = dab / mean; // d2(s_i, s_{i+1}, s_{i+2})
      t.d2b = dac / mean; // d2(s_i, s_{i+2}, s_{i+1})
    }
    t.deg_angle = (dab == 0.0) || (dbc == 0.0);
    if (!t.deg_angle) t.ang = angle(a, b, c);
    if (model.config.adjacency) {
      t.edge_a = ctx.tpl_adj.has_edge(tpl.order[i], tpl.order[i1]);
      t.edge_b = ctx.tpl_adj.has_edge(tpl.order[i], tpl.order[i2]);
    }
  }
  return ctx;
}

std::size_t clique_groups_raw(const CliqueContext& ctx, std::size_t i, std::size_t yi,
                              std::size_t yi1, std::size_t yi2,
                              std::array<double, FeatureConfig::group_count>& out) {
  const std::size_t n = ctx.n_nodes();
  if (i >= n) fail(ErrorCode::invalid, "clique index out of range");
  const std::size_t m = ctx.target->size();
  if (yi >= m || yi1 >= m || yi2 >= m)
    fail(ErrorCode::invalid, "candidate target index out of range");

  const CliqueContext::TplClique& t = ctx.tpl_cliques[i];
  const Point2 &ya = ctx.target->points[yi], &yb = ctx.target->points[yi1],
               &yc = ctx.target->points[yi2];
  const double dab = dist(ya, yb), dbc = dist(yb, yc), dac = dist(ya, yc);

  std::size_t g = 0;
  if (ctx.config.unary) out[g++] = ctx.unary_cost(i, yi);
  if (ctx.config.distance) {
    const double e1 = t.d1a - dab / ctx.tgt_width;
    const double e2 = t.d1b - dac / ctx.tgt_width;
    out[g++] = e1 * e1 + e2 * e2;
  }
  if (ctx.config.adjacency) {
    out[g++] = (t.edge_a && ctx.tgt_adj.has_edge(yi, yi1) ? 1.0 : 0.0) +
               (t.edge_b && ctx.tgt_adj.has_edge(yi, yi2) ? 1.0 : 0.0);
  }
  if (ctx.config.scaled_distance) {
    const double mean = (dab + dbc + dac) / 3.0;
    if (t.deg_scaled || !(mean > 0.0)) {
      out[g++] = ctx.penalty;
    } else {
      const double e1 = t.d2a - dab / mean;
      const double e2 = t.d2b - dac / mean;
      out[g++] = e1 * e1 + e2 * e2;
    }
  }
  if (ctx.config.angle) {
    if (t.deg_angle || dab == 0.0 || dbc == 0.0) {
      out[g++] = ctx.penalty;
    } else {
      const double e = t.ang - angle(ya, yb, yc);
      out[g++] = e * e;
    }
  }
  return g;
}

std::vector<double> clique_feature(const CliqueContext& ctx, std::size_t i, std::size_t yi,
                                   std::size_t yi1, std::size_t yi2) {
  std::array<double, FeatureConfig::group_count> raw{};
  const std::size_t g = clique_groups_raw(ctx, i, yi, yi1, yi2, raw);
  std::vector<double> out(g);
  for (std::size_t k = 0; k < g; ++k) out[k] = raw[k] * ctx.scale_factors[k];
  return out;
}

} // namespace iso::feat
