#pragma once
// Reference implementations used only by the tests.  Each is written from
// the definitions directly and independently of the library code (different
// formulas / algorithms where possible) so the two sides cross-check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "core/types.hpp"

namespace oracle {

inline double edist(const iso::Point2& a, const iso::Point2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

inline double d1(const iso::Point2& a, const iso::Point2& b, double width) {
  return edist(a, b) / width;
}

inline double d2(const iso::Point2& a, const iso::Point2& b, const iso::Point2& c) {
  const double mean = (edist(a, b) + edist(b, c) + edist(a, c)) / 3.0;
  return edist(a, b) / mean;
}

// Angle at b via the cosine rule on clamped normalised vectors (the library
// uses atan2 instead).
inline double angle(const iso::Point2& a, const iso::Point2& b, const iso::Point2& c) {
  const double nu = edist(a, b), nv = edist(c, b);
  const double dot = (a.x - b.x) * (c.x - b.x) + (a.y - b.y) * (c.y - b.y);
  const double cosv = std::clamp(dot / (nu * nv), -1.0, 1.0);
  return std::acos(cosv);
}

inline std::vector<double> phi0(const std::vector<double>& s, const std::vector<double>& u) {
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = (s[i] - u[i]) * (s[i] - u[i]);
  return out;
}

// Exhaustive rectangular assignment: maximise the row sum over injective
// row->column maps; among ties keep the lexicographically smallest map.
struct LapBest {
  double score = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> map;
};

inline void lap_recurse(const std::vector<double>& m, std::size_t rows, std::size_t cols,
                        std::size_t row, std::vector<bool>& used, std::vector<std::size_t>& cur,
                        double acc, LapBest& best) {
  if (row == rows) {
    if (acc > best.score) {
      best.score = acc;
      best.map = cur;
    }
    return;
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (used[c]) continue;
    used[c] = true;
    cur[row] = c;
    lap_recurse(m, rows, cols, row + 1, used, cur, acc + m[row * cols + c], best);
    used[c] = false;
  }
}

inline LapBest lap_enumerate(const std::vector<double>& m, std::size_t rows, std::size_t cols) {
  LapBest best;
  std::vector<bool> used(cols, false);
  std::vector<std::size_t> cur(rows, 0);
  lap_recurse(m, rows, cols, 0, used, cur, 0.0, best);
  return best;
}

// Shape context histogram by direct binning against explicit edge arrays.
inline std::vector<double> shape_context(const std::vector<iso::Point2>& pts, std::size_t i,
                                         int rb, int ab, double r_inner, double r_outer) {
  const std::size_t n = pts.size();
  double mpd = 0.0;
  std::size_t cnt = 0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      mpd += edist(pts[a], pts[b]);
      ++cnt;
    }
  mpd /= static_cast<double>(cnt);

  std::vector<double> redges;
  for (int e = 0; e <= rb; ++e)
    redges.push_back(r_inner * std::pow(r_outer / r_inner, double(e) / rb));

  std::vector<double> h(static_cast<std::size_t>(rb * ab), 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    const double r = edist(pts[j], pts[i]) / mpd;
    int rbin = 0;
    while (rbin < rb - 1 && r >= redges[static_cast<std::size_t>(rbin) + 1]) ++rbin;
    double th = std::atan2(pts[j].y - pts[i].y, pts[j].x - pts[i].x);
    if (th < 0) th += 2.0 * M_PI;
    int abin = std::min(ab - 1, static_cast<int>(th * ab / (2.0 * M_PI)));
    h[static_cast<std::size_t>(rbin * ab + abin)] += 1.0 / static_cast<double>(n - 1);
  }
  return h;
}

} // namespace oracle
