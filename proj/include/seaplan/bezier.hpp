#pragma once

#include "seaplan/env_graph.hpp"
#include "seaplan/geometry.hpp"

#include <array>
#include <utility>
#include <vector>

namespace seaplan {

/// Bezier curve in Bernstein form. A degree-0 curve (one point) is allowed
/// as the hodograph of a segment.
class BezierCurve {
public:
  BezierCurve() = default;
  explicit BezierCurve(std::vector<Vec2> control_points);

  int degree() const { return static_cast<int>(pts_.size()) - 1; }
  const std::vector<Vec2>& control_points() const { return pts_; }
  const Vec2& front() const { return pts_.front(); }
  const Vec2& back() const { return pts_.back(); }

  /// de Casteljau evaluation; throws DomainError outside [0, 1].
  Vec2 evaluate(double theta) const;
  /// Polynomial evaluation without the domain check (used by integrators
  /// whose intermediate stages may step past the end).
  Vec2 evaluate_unchecked(double theta) const;

  /// Hodograph: degree n-1 with points n (p_{i+1} - p_i).
  BezierCurve derivative() const;

  /// Control-polygon length.
  double polygon_length() const;

private:
  std::vector<Vec2> pts_;
};

/// Signed curvature (x'y'' - y'x'') / |P'|^3. Throws DegenerateTangent when
/// |P'| <= 1e-9.
double curvature(const BezierCurve& c, double theta);

/// max |curvature| over [0, 1]: closed form for quadratics, otherwise
/// 200-point sampling refined by golden-section search.
double max_abs_curvature(const BezierCurve& c);

/// Arc length by adaptive Simpson quadrature of |P'|.
double arc_length(const BezierCurve& c);

std::pair<BezierCurve, BezierCurve> cubic_to_quadratics(const std::array<Vec2, 4>& p);
std::pair<BezierCurve, BezierCurve> quartic_to_cubics(const std::array<Vec2, 5>& p);

/// Max curvature of a cubic through its two quadratic approximants.
double cubic_max_curvature_approx(const std::array<Vec2, 4>& p);
/// Max curvature of a quartic through its two cubic approximants.
double quartic_max_curvature_approx(const std::array<Vec2, 5>& p);

/// Optimal third control point on the ray p1 -> ray_end, at distance
/// min(beta, (-cos(phi) + sqrt(cos^2(phi) + 8)) / 2 * alpha) from p1, where
/// phi is the angle between p1 - p0 and ray_end - p1.
Vec2 opt_quad1(const Vec2& p0, const Vec2& p1, const Vec2& ray_end);
double opt_quad1_length(double alpha, double beta, double phi);

enum class Continuity { G0, G1 };

struct PiecewiseBezier {
  std::vector<BezierCurve> curves;
  std::vector<Continuity> joins;  // size curves.size() - 1

  bool empty() const { return curves.empty(); }
  Vec2 start() const { return curves.front().front(); }
  Vec2 end() const { return curves.back().back(); }
  std::vector<Vec2> sample(int per_curve) const;
  double length() const;
};

/// Tangent direction of the curve at theta = 0 or 1 from the first/last
/// non-degenerate control leg.
Vec2 start_tangent(const BezierCurve& c);
Vec2 end_tangent(const BezierCurve& c);

/// Tangent angle mismatch at every join, radians.
std::vector<double> join_angles(const PiecewiseBezier& pw);

/// Smallest (distance to obstacle center - r_o - clearance) over the convex
/// hull of `points`; negative means collision.
double hull_margin(std::span<const Vec2> points, const std::vector<Obstacle>& obstacles,
                   double clearance);
bool hull_clear(std::span<const Vec2> points, const std::vector<Obstacle>& obstacles,
                double clearance);

/// Segment locus for a free control point: from + t (to - from), t in [0, 1].
struct Locus {
  Vec2 from{0.0, 0.0};
  Vec2 to{0.0, 0.0};

  bool fixed() const { return (to - from).norm() <= kGeomTol; }
  Vec2 at(double t) const { return from + t * (to - from); }
  static Locus point(const Vec2& p) { return {p, p}; }
};

/// Curvature-minimizing placement of control points on their loci. The
/// curve's control set {p0, q_1..q_k} must keep a collision-free hull.
struct ControlPointSearch {
  std::vector<Obstacle> obstacles;
  double clearance = 0.0;
  /// Smallest admissible locus parameter for a free point.
  double t_min = 1e-3;
};

/// q1..q3 for a cubic starting at p0. Throws NoFeasiblePoint.
std::array<Vec2, 3> opt_cubic(const Vec2& p0, const std::array<Locus, 3>& loci,
                              const ControlPointSearch& search);

/// q1..q4 for a quartic starting at p0. Throws NoFeasiblePoint.
std::array<Vec2, 4> opt_quar(const Vec2& p0, const std::array<Locus, 4>& loci,
                             const ControlPointSearch& search);

/// Objective of opt_cubic/opt_quar, exposed for oracles. Infinity on
/// degenerate curves.
double cubic_objective(const Vec2& p0, const std::array<Vec2, 3>& q);
double quartic_objective(const Vec2& p0, const std::array<Vec2, 4>& q);

/// Farthest t in [0, 1] along from -> to keeping hull(base + point) clear,
/// assuming feasibility is monotone in t. Bisection to `tol` metres.
double farthest_clear(const std::vector<Vec2>& base, const Vec2& from, const Vec2& to,
                      const std::vector<Obstacle>& obstacles, double clearance, double tol = 1e-6);

}  // namespace seaplan
