#include "assign/lap.hpp"

#include <cmath>
#include <limits>

#include "features/clique.hpp"
#include "learn/loss.hpp"

namespace iso::lap {

CostMatrix make_cost_matrix(std::size_t rows, std::size_t cols, double fill) {
  if (rows == 0 || cols == 0) fail(ErrorCode::invalid, "cost matrix needs at least one row and column");
  CostMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.v.assign(rows * cols, fill);
  return m;
}

double assignment_score(const CostMatrix& m, const Assignment& a) {
  a.validate(m.rows, m.cols);
  double acc = 0.0;
  for (std::size_t r = 0; r < m.rows; ++r) acc += m.at(r, a.map[r]);
  return acc;
}

namespace {

void check_matrix(const CostMatrix& m) {
  if (m.rows == 0 || m.cols == 0 || m.v.size() != m.rows * m.cols)
    fail(ErrorCode::invalid, "malformed cost matrix");
  if (m.rows > m.cols)
    fail(ErrorCode::invalid, "assignment needs rows <= cols, got " + std::to_string(m.rows) +
                                 "x" + std::to_string(m.cols));
  for (double x : m.v)
    if (!std::isfinite(x)) fail(ErrorCode::invalid, "cost matrix has a non-finite entry");
}

// Shortest-augmenting-path assignment on a minimisation problem, 1-based
// with column 0 as a sentinel.  Standard potentials formulation; O(r^2 c).
std::vector<std::size_t> lap_min(std::size_t rows, std::size_t cols,
                                 const std::vector<double>& cost) {
  const double INF = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<std::size_t> p(cols + 1, 0), way(cols + 1, 0);
  for (std::size_t i = 1; i <= rows; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(cols + 1, INF);
    std::vector<char> used(cols + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      std::size_t j1 = 0;
      double delta = INF;
      for (std::size_t j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * cols + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) { minv[j] = cur; way[j] = j0; }
        if (minv[j] < delta) { delta = minv[j]; j1 = j; }
      }
      for (std::size_t j = 0; j <= cols; ++j) {
        if (used[j]) { u[p[j]] += delta; v[j] -= delta; }
        else minv[j] -= delta;
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(rows, 0);
  for (std::size_t j = 1; j <= cols; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

Assignment solve_raw_checked(const CostMatrix& m) {
  std::vector<double> neg(m.v.size());
  for (std::size_t i = 0; i < m.v.size(); ++i) neg[i] = -m.v[i];
  Assignment a;
  a.map = lap_min(m.rows, m.cols, neg);
  return a;
}

} // namespace

Assignment solve_lap_raw(const CostMatrix& m) {
  check_matrix(m);
  return solve_raw_checked(m);
}

Assignment solve_lap(const CostMatrix& m) {
  check_matrix(m);
  // Build the lexicographically smallest optimum row by row: for each row,
  // keep the smallest column whose forced choice still allows an optimal
  // completion of the remaining rows.
  const std::size_t R = m.rows, C = m.cols;
  std::vector<std::size_t> chosen(R);
  std::vector<char> col_used(C, 0);
  double prefix = 0.0;

  std::vector<std::size_t> free_cols;
  for (std::size_t i = 0; i < R; ++i) {
    double best_total = -std::numeric_limits<double>::infinity();
    std::size_t best_j = C;
    const std::size_t rem_rows = R - i - 1;
    for (std::size_t j = 0; j < C; ++j) {
      if (col_used[j]) continue;
      double total = prefix + m.at(i, j);
      if (rem_rows > 0) {
        free_cols.clear();
        for (std::size_t c = 0; c < C; ++c)
          if (!col_used[c] && c != j) free_cols.push_back(c);
        std::vector<double> sub(rem_rows * free_cols.size());
        for (std::size_t r = 0; r < rem_rows; ++r)
          for (std::size_t c = 0; c < free_cols.size(); ++c)
            sub[r * free_cols.size() + c] = -m.at(i + 1 + r, free_cols[c]);
        const auto tail = lap_min(rem_rows, free_cols.size(), sub);
        for (std::size_t r = 0; r < rem_rows; ++r)
          total += m.at(i + 1 + r, free_cols[tail[r]]);
      }
      if (total > best_total) { best_total = total; best_j = j; } // first j wins ties
    }
    chosen[i] = best_j;
    col_used[best_j] = 1;
    prefix += m.at(i, chosen[i]);
  }
  Assignment a;
  a.map = std::move(chosen);
  return a;
}

CostMatrix unary_scores(const TemplateShape& tpl, const Scene& target,
                        const std::vector<double>& theta0, const LossAugment* aug) {
  const std::vector<double> costs = feat::unary_cost_matrix(tpl, target, theta0);
  const std::size_t n = tpl.size(), mcols = target.size();
  CostMatrix m = make_cost_matrix(n, mcols);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t u = 0; u < mcols; ++u) m.at(i, u) = -costs[i * mcols + u];
  if (aug != nullptr) {
    if (aug->gt == nullptr) fail(ErrorCode::invalid, "loss augmentation needs a ground truth");
    aug->gt->validate(n, mcols);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t u = 0; u < mcols; ++u)
        m.at(i, u) += learn::node_loss(aug->kind, u, aug->gt->map[i], target, n);
  }
  return m;
}

} // namespace iso::lap
