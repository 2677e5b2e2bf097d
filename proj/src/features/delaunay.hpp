#pragma once
// Delaunay edge graph of a point set plus the pairwise adjacency co-occurrence
// feature built on top of it.

#include <cstdint>
#include <utility>
#include <vector>

#include "core/types.hpp"

namespace iso::feat {

struct AdjacencyGraph {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges; // i < j, sorted lexicographically
  std::vector<std::uint8_t> matrix;                       // n*n symmetric lookup

  bool has_edge(std::size_t i, std::size_t j) const {
    return i < n && j < n && matrix[i * n + j] != 0;
  }
};

// Edge (i,j) is kept iff some circle through points i and j has every other
// point strictly outside.  Co-circular ties are resolved by perturbing each
// point by a deterministic index-dependent displacement far below geometric
// scale, so the result is always a proper triangulation's edge set.
// Errors: fewer than 3 points, or all points collinear.
AdjacencyGraph delaunay(const std::vector<Point2>& points);

// 1.0 iff (p1,p2) is an edge of the template graph AND (q1,q2) is an edge of
// the target graph, else 0.0.
double adjacency_feature(const AdjacencyGraph& g_template, const AdjacencyGraph& g_target,
                         std::size_t p1, std::size_t p2, std::size_t q1, std::size_t q2);

} // namespace iso::feat
