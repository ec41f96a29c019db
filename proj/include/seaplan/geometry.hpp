#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace seaplan {

using Vec2 = Eigen::Vector2d;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define SEAPLAN_DEFINE_ERROR(Name)                                             \
  class Name : public Error {                                                  \
  public:                                                                      \
    using Error::Error;                                                        \
  }

SEAPLAN_DEFINE_ERROR(DomainError);
SEAPLAN_DEFINE_ERROR(DegenerateInput);
SEAPLAN_DEFINE_ERROR(DegenerateTangent);
SEAPLAN_DEFINE_ERROR(NoFeasiblePoint);
SEAPLAN_DEFINE_ERROR(EmptyEnvironment);
SEAPLAN_DEFINE_ERROR(Disconnected);
SEAPLAN_DEFINE_ERROR(NonpositiveDuration);
SEAPLAN_DEFINE_ERROR(DimensionMismatch);
SEAPLAN_DEFINE_ERROR(ReferenceExpired);
SEAPLAN_DEFINE_ERROR(SpliceMismatch);
SEAPLAN_DEFINE_ERROR(ParseError);
SEAPLAN_DEFINE_ERROR(ValidationError);
SEAPLAN_DEFINE_ERROR(IoError);

#undef SEAPLAN_DEFINE_ERROR

inline constexpr double kPi = 3.14159265358979323846;

/// Absolute tolerance of geometric predicates (m) and angle predicates (rad).
inline constexpr double kGeomTol = 1e-6;

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

double cross(const Vec2& a, const Vec2& b);

/// Unsigned angle between two non-zero vectors, in [0, pi].
double angle_between(const Vec2& a, const Vec2& b);

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

/// Distance from p to the infinite line through a and b.
double point_line_distance(const Vec2& p, const Vec2& a, const Vec2& b);

/// Sign of p relative to the directed line a->b: +1 left, -1 right, 0 on it
/// (within kGeomTol).
int side_of_line(const Vec2& p, const Vec2& a, const Vec2& b);

/// Intersection parameter pair (t on a0->a1, s on b0->b1) of two segments, if
/// they intersect.
std::optional<std::pair<double, double>> segment_intersection(const Vec2& a0, const Vec2& a1,
                                                              const Vec2& b0, const Vec2& b1);

/// Intersection of the ray origin + t*dir (t >= 0) with segment a->b;
/// returns t.
std::optional<double> ray_segment_intersection(const Vec2& origin, const Vec2& dir, const Vec2& a,
                                               const Vec2& b);

/// Counter-clockwise convex hull (Andrew's monotone chain). Collinear points
/// are dropped; degenerate inputs give 1 or 2 points.
std::vector<Vec2> convex_hull(std::span<const Vec2> points);

/// Distance from p to the convex hull of `points`; 0 when p is inside.
double distance_to_hull(const Vec2& p, std::span<const Vec2> points);

/// Distance from p to a counter-clockwise convex polygon; 0 when inside.
double distance_to_convex_polygon(const Vec2& p, std::span<const Vec2> polygon);

bool point_in_convex_polygon(const Vec2& p, std::span<const Vec2> polygon, double tol = kGeomTol);

/// Clips a counter-clockwise convex polygon by the half-plane n.x <= c.
std::vector<Vec2> clip_half_plane(std::span<const Vec2> polygon, const Vec2& n, double c);

/// Intersections of the infinite line through `p` with direction `dir` and
/// the boundary of a convex polygon, as signed line parameters.
std::vector<double> line_polygon_intersections(const Vec2& p, const Vec2& dir,
                                               std::span<const Vec2> polygon);

/// Axis-aligned rectangle.
struct Box {
  Vec2 lo{0.0, 0.0};
  Vec2 hi{0.0, 0.0};

  bool contains(const Vec2& p) const;
  bool degenerate() const { return !(hi.x() > lo.x() && hi.y() > lo.y()); }
  std::vector<Vec2> polygon() const;
};

}  // namespace seaplan
