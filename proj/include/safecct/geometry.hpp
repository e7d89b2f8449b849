#pragma once

#include <Eigen/Dense>

#include <vector>

namespace safecct::geom {

using Pt = Eigen::Vector2d;
using Polygon = std::vector<Pt>;  // implicitly closed, no repeated last vertex

/// Signed shoelace area; positive for counter-clockwise rings.
double signed_area(const Polygon& poly);
double area(const Polygon& poly);

/// Even-odd rule.
bool inside(const Polygon& poly, const Pt& q);

double segment_distance(const Pt& q, const Pt& a, const Pt& b);
double boundary_distance(const Polygon& poly, const Pt& q);

/// No two non-adjacent edges touch.  O(n²), fine for the few hundred vertices used here.
bool is_simple(const Polygon& poly);

/// Drops consecutive duplicates and collinear interior points.
Polygon simplify(const Polygon& poly, double eps = 1e-12);

}  // namespace safecct::geom
