#include "features/geometry.hpp"

#include <cmath>

namespace iso::feat {

double d1(const Point2& a, const Point2& b, double scene_width) {
  if (!(scene_width > 0.0)) fail(ErrorCode::invalid, "d1: scene width must be positive");
  return dist(a, b) / scene_width;
}

double phi1(const Point2& s1, const Point2& s2, const Point2& y1, const Point2& y2,
            double template_width, double target_width) {
  const double d = d1(s1, s2, template_width) - d1(y1, y2, target_width);
  return d * d;
}

double d2(const Point2& a, const Point2& b, const Point2& c) {
  const double dab = dist(a, b), dbc = dist(b, c), dac = dist(a, c);
  const double mean = (dab + dbc + dac) / 3.0;
  if (!(mean > 0.0)) fail(ErrorCode::degenerate, "d2: all three points coincide");
  return dab / mean;
}

double phi2(const Point2& s1, const Point2& s2, const Point2& s3, const Point2& y1,
            const Point2& y2, const Point2& y3) {
  const double d = d2(s1, s2, s3) - d2(y1, y2, y3);
  return d * d;
}

double angle(const Point2& a, const Point2& b, const Point2& c) {
  const double ux = a.x - b.x, uy = a.y - b.y;
  const double vx = c.x - b.x, vy = c.y - b.y;
  if ((ux == 0.0 && uy == 0.0) || (vx == 0.0 && vy == 0.0))
    fail(ErrorCode::degenerate, "angle: vertex coincides with an endpoint");
  // atan2 of |cross| and dot is stable for both tiny and near-pi angles.
  const double cross = ux * vy - uy * vx;
  const double dot = ux * vx + uy * vy;
  return std::atan2(std::fabs(cross), dot);
}

double phi3(const Point2& s1, const Point2& s2, const Point2& s3, const Point2& y1,
            const Point2& y2, const Point2& y3) {
  const double d = angle(s1, s2, s3) - angle(y1, y2, y3);
  return d * d;
}

std::vector<double> phi0(const std::vector<double>& s, const std::vector<double>& u) {
  if (s.empty() || s.size() != u.size())
    fail(ErrorCode::dimension, "phi0: descriptor dimensions differ (" + std::to_string(s.size()) +
                                   " vs " + std::to_string(u.size()) + ")");
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = s[i] - u[i];
    out[i] = d * d;
  }
  return out;
}

double collapse_unary(const std::vector<double>& theta0, const std::vector<double>& s,
                      const std::vector<double>& u) {
  if (theta0.size() != s.size() || s.size() != u.size() || s.empty())
    fail(ErrorCode::dimension, "collapse_unary: dimension mismatch (theta0=" +
                                   std::to_string(theta0.size()) + ", s=" +
                                   std::to_string(s.size()) + ", u=" + std::to_string(u.size()) +
                                   ")");
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = s[i] - u[i];
    acc += theta0[i] * d * d;
  }
  return acc;
}

} // namespace iso::feat
