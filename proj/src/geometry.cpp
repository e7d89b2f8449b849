#include "safecct/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace safecct::geom {

double signed_area(const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Pt& a = poly[k];
    const Pt& b = poly[(k + 1) % n];
    s += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * s;
}

double area(const Polygon& poly) { return std::abs(signed_area(poly)); }

bool inside(const Polygon& poly, const Pt& q) {
  bool in = false;
  const std::size_t n = poly.size();
  for (std::size_t k = 0, l = n - 1; k < n; l = k++) {
    const Pt& a = poly[k];
    const Pt& b = poly[l];
    if ((a.y() > q.y()) != (b.y() > q.y())) {
      const double x = a.x() + (q.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (q.x() < x) in = !in;
    }
  }
  return in;
}

double segment_distance(const Pt& q, const Pt& a, const Pt& b) {
  const Pt ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (q - a).norm();
  const double s = std::clamp((q - a).dot(ab) / len2, 0.0, 1.0);
  return (q - (a + s * ab)).norm();
}

double boundary_distance(const Polygon& poly, const Pt& q) {
  double best = INFINITY;
  const std::size_t n = poly.size();
  for (std::size_t k = 0; k < n; ++k) best = std::min(best, segment_distance(q, poly[k], poly[(k + 1) % n]));
  return best;
}

namespace {

double cross(const Pt& o, const Pt& a, const Pt& b) { return (a - o).x() * (b - o).y() - (a - o).y() * (b - o).x(); }

bool on_segment(const Pt& p, const Pt& q, const Pt& r) {
  return std::min(p.x(), r.x()) <= q.x() && q.x() <= std::max(p.x(), r.x()) && std::min(p.y(), r.y()) <= q.y() &&
         q.y() <= std::max(p.y(), r.y());
}

bool segments_touch(const Pt& p1, const Pt& p2, const Pt& p3, const Pt& p4) {
  const double d1 = cross(p3, p4, p1), d2 = cross(p3, p4, p2);
  const double d3 = cross(p1, p2, p3), d4 = cross(p1, p2, p4);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (d1 == 0 && on_segment(p3, p1, p4)) return true;
  if (d2 == 0 && on_segment(p3, p2, p4)) return true;
  if (d3 == 0 && on_segment(p1, p3, p2)) return true;
  if (d4 == 0 && on_segment(p1, p4, p2)) return true;
  return false;
}

}  // namespace

bool is_simple(const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (b == a + 1 || (a == 0 && b == n - 1)) continue;
      if (segments_touch(poly[a], poly[(a + 1) % n], poly[b], poly[(b + 1) % n])) return false;
    }
  }
  return true;
}

Polygon simplify(const Polygon& poly, double eps) {
  Polygon out;
  for (const Pt& p : poly)
    if (out.empty() || (p - out.back()).norm() > eps) out.push_back(p);
  while (out.size() > 1 && (out.front() - out.back()).norm() <= eps) out.pop_back();
  bool changed = true;
  while (changed && out.size() > 3) {
    changed = false;
    for (std::size_t k = 0; k < out.size() && out.size() > 3; ++k) {
      const Pt& a = out[(k + out.size() - 1) % out.size()];
      const Pt& b = out[k];
      const Pt& c = out[(k + 1) % out.size()];
      const double scale = std::max({1.0, (c - a).norm()});
      if (std::abs(cross(a, b, c)) <= eps * scale && (b - a).dot(c - b) >= 0) {
        out.erase(out.begin() + static_cast<long>(k));
        changed = true;
      }
    }
  }
  return out;
}

}  // namespace safecct::geom
