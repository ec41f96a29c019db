#include "seaplan/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace seaplan {

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double angle_between(const Vec2& a, const Vec2& b) {
  return std::atan2(std::abs(cross(a, b)), a.dot(b));
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double point_line_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len = ab.norm();
  if (len == 0.0) return (p - a).norm();
  return std::abs(cross(ab, p - a)) / len;
}

int side_of_line(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len = ab.norm();
  const double signed_dist = len > 0.0 ? cross(ab, p - a) / len : 0.0;
  if (signed_dist > kGeomTol) return 1;
  if (signed_dist < -kGeomTol) return -1;
  return 0;
}

std::optional<std::pair<double, double>> segment_intersection(const Vec2& a0, const Vec2& a1,
                                                              const Vec2& b0, const Vec2& b1) {
  const Vec2 r = a1 - a0;
  const Vec2 s = b1 - b0;
  const double denom = cross(r, s);
  if (std::abs(denom) < 1e-14) return std::nullopt;
  const double t = cross(b0 - a0, s) / denom;
  const double u = cross(b0 - a0, r) / denom;
  const double eps = 1e-12;
  if (t < -eps || t > 1.0 + eps || u < -eps || u > 1.0 + eps) return std::nullopt;
  return std::make_pair(std::clamp(t, 0.0, 1.0), std::clamp(u, 0.0, 1.0));
}

std::optional<double> ray_segment_intersection(const Vec2& origin, const Vec2& dir, const Vec2& a,
                                               const Vec2& b) {
  const Vec2 s = b - a;
  const double denom = cross(dir, s);
  if (std::abs(denom) < 1e-14) return std::nullopt;
  const double t = cross(a - origin, s) / denom;
  const double u = cross(a - origin, dir) / denom;
  if (t < 0.0 || u < -1e-12 || u > 1.0 + 1e-12) return std::nullopt;
  return t;
}

std::vector<Vec2> convex_hull(std::span<const Vec2> points) {
  std::vector<Vec2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() <= 2) return pts;

  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    const Vec2& p = pts[i];
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

bool point_in_convex_polygon(const Vec2& p, std::span<const Vec2> polygon, double tol) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[(i + 1) % n];
    const Vec2 ab = b - a;
    const double len = ab.norm();
    if (len == 0.0) continue;
    if (cross(ab, p - a) / len < -tol) return false;
  }
  return true;
}

double distance_to_convex_polygon(const Vec2& p, std::span<const Vec2> polygon) {
  const std::size_t n = polygon.size();
  if (n == 0) return std::numeric_limits<double>::infinity();
  if (n == 1) return (p - polygon[0]).norm();
  if (n >= 3 && point_in_convex_polygon(p, polygon, 0.0)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    best = std::min(best, point_segment_distance(p, polygon[i], polygon[(i + 1) % n]));
  }
  return best;
}

double distance_to_hull(const Vec2& p, std::span<const Vec2> points) {
  const auto hull = convex_hull(points);
  return distance_to_convex_polygon(p, hull);
}

std::vector<Vec2> clip_half_plane(std::span<const Vec2> polygon, const Vec2& n, double c) {
  std::vector<Vec2> out;
  const std::size_t m = polygon.size();
  out.reserve(m + 1);
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[(i + 1) % m];
    const double da = n.dot(a) - c;
    const double db = n.dot(b) - c;
    if (da <= 0.0) out.push_back(a);
    if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
      const double t = da / (da - db);
      out.push_back(a + t * (b - a));
    }
  }
  return out;
}

std::vector<double> line_polygon_intersections(const Vec2& p, const Vec2& dir,
                                               std::span<const Vec2> polygon) {
  std::vector<double> ts;
  const std::size_t m = polygon.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[(i + 1) % m];
    const Vec2 s = b - a;
    const double denom = cross(dir, s);
    if (std::abs(denom) < 1e-14) continue;
    const double t = cross(a - p, s) / denom;
    const double u = cross(a - p, dir) / denom;
    if (u >= -1e-12 && u <= 1.0 + 1e-12) ts.push_back(t);
  }
  std::sort(ts.begin(), ts.end());
  return ts;
}

bool Box::contains(const Vec2& p) const {
  return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
}

std::vector<Vec2> Box::polygon() const {
  return {lo, Vec2(hi.x(), lo.y()), hi, Vec2(lo.x(), hi.y())};
}

}  // namespace seaplan
