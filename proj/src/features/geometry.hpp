#pragma once
// Pointwise and pairwise geometric feature primitives.  All comparison
// features are squared differences between a template-side quantity and the
// corresponding target-side quantity.

#include <vector>

#include "core/types.hpp"

namespace iso::feat {

// Euclidean distance scaled by the width of the scene the points live in.
double d1(const Point2& a, const Point2& b, double scene_width);

double phi1(const Point2& s1, const Point2& s2, const Point2& y1, const Point2& y2,
            double template_width, double target_width);

// Distance |a-b| scaled by the mean of the three pairwise distances of the
// triple, which makes it invariant to similarity transforms.  Throws a
// degenerate error when the whole triple is coincident.
double d2(const Point2& a, const Point2& b, const Point2& c);

double phi2(const Point2& s1, const Point2& s2, const Point2& s3, const Point2& y1,
            const Point2& y2, const Point2& y3);

// Angle at the middle argument b between the rays (a-b) and (c-b), in
// [0, pi].  Throws a degenerate error when either ray has zero length.
double angle(const Point2& a, const Point2& b, const Point2& c);

double phi3(const Point2& s1, const Point2& s2, const Point2& s3, const Point2& y1,
            const Point2& y2, const Point2& y3);

// Elementwise squared descriptor difference.
std::vector<double> phi0(const std::vector<double>& s, const std::vector<double>& u);

// <theta0, phi0(s, u)> without materialising the difference vector.
double collapse_unary(const std::vector<double>& theta0, const std::vector<double>& s,
                      const std::vector<double>& u);

} // namespace iso::feat
