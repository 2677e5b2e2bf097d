#pragma once
// Rectangular linear assignment: pick one column per row (columns distinct)
// maximising the total score.

#include <vector>

#include "core/model.hpp"
#include "core/types.hpp"

namespace iso::lap {

struct CostMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> v; // row-major scores

  double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
};

CostMatrix make_cost_matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

// Total score of an assignment, summed in row order (the comparison order
// used throughout the solver and its tests).
double assignment_score(const CostMatrix& m, const Assignment& a);

// Exact maximiser; among equal-scoring assignments, returns the one whose
// row->column vector is lexicographically smallest.  Requires rows <= cols
// and finite entries.
Assignment solve_lap(const CostMatrix& m);

// Same optimum without the lexicographic refinement pass; deterministic, and
// much cheaper when called inside training loops where any maximiser works.
Assignment solve_lap_raw(const CostMatrix& m);

// Per-node loss added to the score of every non-ground-truth choice when
// generating the most violated assignment during training.
struct LossAugment {
  LossKind kind = LossKind::hamming;
  const Assignment* gt = nullptr;
};

// Score matrix for the linear matcher: entry (i, u) is -<theta0, phi0(s_i, u)>,
// plus the per-node loss toward ground truth when augmenting.
CostMatrix unary_scores(const TemplateShape& tpl, const Scene& target,
                        const std::vector<double>& theta0,
                        const LossAugment* aug = nullptr);

} // namespace iso::lap
