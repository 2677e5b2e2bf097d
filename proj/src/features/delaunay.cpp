#include "features/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace iso::feat {

namespace {

// Candidate circle centres through points i and j live on the perpendicular
// bisector c(t) = m + t*d.  For any other point k,
//   |c(t)-k|^2 - |c(t)-i|^2  =  a*t + b      (linear in t)
// with a = 2 d.(i-k) and b = 2 m.(i-k) + |k|^2 - |i|^2, so k lies strictly
// inside the circle iff a*t + b < 0.  The edge is Delaunay iff the system
// { a_k t + b_k >= 0 } has a solution.
bool edge_feasible(const std::vector<Point2>& q, std::size_t i, std::size_t j) {
  const double mx = 0.5 * (q[i].x + q[j].x), my = 0.5 * (q[i].y + q[j].y);
  const double dx = -(q[j].y - q[i].y), dy = q[j].x - q[i].x; // bisector direction
  const double qi2 = q[i].x * q[i].x + q[i].y * q[i].y;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (k == i || k == j) continue;
    const double ex = q[i].x - q[k].x, ey = q[i].y - q[k].y;
    const double a = 2.0 * (dx * ex + dy * ey);
    const double b = 2.0 * (mx * ex + my * ey) + (q[k].x * q[k].x + q[k].y * q[k].y) - qi2;
    if (a > 0.0) lo = std::max(lo, -b / a);
    else if (a < 0.0) hi = std::min(hi, -b / a);
    else if (b < 0.0) return false; // k collinear and strictly between i and j
    if (lo > hi) return false;
  }
  return true;
}

} // namespace

AdjacencyGraph delaunay(const std::vector<Point2>& points) {
  const std::size_t n = points.size();
  if (n < 3) fail(ErrorCode::invalid, "delaunay: need at least 3 points");

  // Normalise to a unit box so the perturbation scale below is meaningful.
  double minx = points[0].x, maxx = points[0].x, miny = points[0].y, maxy = points[0].y;
  for (const Point2& p : points) {
    minx = std::min(minx, p.x); maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y); maxy = std::max(maxy, p.y);
  }
  const double scale = std::max(maxx - minx, maxy - miny);
  if (!(scale > 0.0)) fail(ErrorCode::degenerate, "delaunay: all points coincide");
  std::vector<Point2> q(n);
  for (std::size_t i = 0; i < n; ++i)
    q[i] = Point2{(points[i].x - minx) / scale, (points[i].y - miny) / scale};

  // Reject fully collinear inputs: pick the point farthest from q[0] and test
  // every cross product against it.
  std::size_t far = 1;
  for (std::size_t i = 2; i < n; ++i)
    if (dist(q[0], q[i]) > dist(q[0], q[far])) far = i;
  const double ax = q[far].x - q[0].x, ay = q[far].y - q[0].y;
  double max_cross = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    max_cross = std::max(max_cross,
                         std::fabs(ax * (q[i].y - q[0].y) - ay * (q[i].x - q[0].x)));
  if (max_cross <= 1e-12) fail(ErrorCode::degenerate, "delaunay: all points are collinear");

  // Index-seeded symbolic perturbation, realised numerically: large enough to
  // dominate double rounding in the feasibility test, far below data scale.
  constexpr double kappa = 1e-9;
  constexpr double golden = 0.6180339887498949;
  for (std::size_t i = 0; i < n; ++i) {
    const double frac = (static_cast<double>(i) + 1.0) * golden;
    const double ang = 2.0 * M_PI * (frac - std::floor(frac));
    const double mag = kappa * (1.0 + static_cast<double>(i) / static_cast<double>(n));
    q[i].x += mag * std::cos(ang);
    q[i].y += mag * std::sin(ang);
  }

  AdjacencyGraph g;
  g.n = n;
  g.matrix.assign(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (edge_feasible(q, i, j)) {
        g.edges.emplace_back(i, j);
        g.matrix[i * n + j] = 1;
        g.matrix[j * n + i] = 1;
      }
  return g;
}

double adjacency_feature(const AdjacencyGraph& g_template, const AdjacencyGraph& g_target,
                         std::size_t p1, std::size_t p2, std::size_t q1, std::size_t q2) {
  return (g_template.has_edge(p1, p2) && g_target.has_edge(q1, q2)) ? 1.0 : 0.0;
}

} // namespace iso::feat
