#include "seaplan/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace seaplan {

namespace {

constexpr double kGolden = 0.6180339887498949;
constexpr double kMinLeg = 1e-4;  // m, shortest control leg created by the search

Vec2 v0_direction(const SmoothingContext& ctx) {
  if (ctx.v0.norm() > 1e-12) return ctx.v0.normalized();
  return (ctx.waypoints[1] - ctx.waypoints[0]).normalized();
}

bool on_p0p1_line(const SmoothingContext& ctx, const Vec2& q) {
  return point_line_distance(q, ctx.waypoints[0], ctx.waypoints[1]) <= kGeomTol;
}

bool acute_or_right(const SmoothingContext& ctx) {
  const Vec2 a = ctx.waypoints[1] - ctx.waypoints[0];
  return angle_between(a, v0_direction(ctx)) <= 0.5 * kPi + kGeomTol;
}

std::vector<Vec2> cell_or_bounds(const std::vector<Vec2>& cell, const Box& bounds, const Vec2& p) {
  if (cell.size() >= 3 && point_in_convex_polygon(p, cell)) return cell;
  return bounds.polygon();
}

// Farthest boundary point of the p0 cell along the ray p0 + s dir.
std::optional<Vec2> cell_exit(const SmoothingContext& ctx, const Vec2& dir) {
  const Vec2& p0 = ctx.waypoints[0];
  for (const auto& poly : {cell_or_bounds(ctx.start_cell, ctx.bounds, p0), ctx.bounds.polygon()}) {
    const auto ts = line_polygon_intersections(p0, dir, poly);
    if (!ts.empty() && ts.back() > kGeomTol) return p0 + ts.back() * dir;
  }
  return std::nullopt;
}

Vec2 snap_end(const Vec2& end, const Vec2& target) {
  return (end - target).norm() <= 1e-9 ? target : end;
}

FirstCurve finish(FirstCase tag, std::vector<Vec2> pts, const SmoothingContext& ctx) {
  const Vec2& p2 = ctx.waypoints[2];
  pts.back() = snap_end(pts.back(), p2);
  FirstCurve fc;
  fc.tag = tag;
  fc.resume = pts.back() == p2 ? 3 : 2;
  fc.curve = BezierCurve(std::move(pts));
  return fc;
}

ControlPointSearch make_search(const SmoothingContext& ctx) {
  ControlPointSearch s;
  s.obstacles = ctx.obstacles;
  s.clearance = ctx.clearance;
  return s;
}

Vec2 ray_point(const SmoothingContext& ctx) {
  const Vec2& p0 = ctx.waypoints[0];
  return p0 + (ctx.waypoints[1] - p0).norm() * v0_direction(ctx);
}

FirstCurve recipe_direct(FirstCase tag, const SmoothingContext& ctx) {
  // p1 sits on the v0 ray up to the collinearity tolerance; snap it there
  return finish(tag, {ctx.waypoints[0], ray_point(ctx), ctx.waypoints[2]}, ctx);
}

FirstCurve recipe_cubic(FirstCase tag, const SmoothingContext& ctx) {
  const Vec2& p0 = ctx.waypoints[0];
  const Vec2& p1 = ctx.waypoints[1];
  const Vec2& p2 = ctx.waypoints[2];
  const std::array<Locus, 3> loci{Locus{p0, ray_point(ctx)}, Locus::point(p1), Locus{p1, p2}};
  const auto q = opt_cubic(p0, loci, make_search(ctx));
  return finish(tag, {p0, q[0], q[1], q[2]}, ctx);
}

FirstCurve recipe_quad1(FirstCase tag, const SmoothingContext& ctx, const std::vector<Vec2>& head) {
  const Vec2& p2 = ctx.waypoints[2];
  const Vec2 corner = head.back();
  if (!hull_clear(head, ctx.obstacles, ctx.clearance)) throw NoFeasiblePoint("first legs collide");
  const double t = farthest_clear(head, corner, p2, ctx.obstacles, ctx.clearance);
  if (t * (p2 - corner).norm() < kMinLeg) throw NoFeasiblePoint("no room after the corner");
  const Vec2 q2_tilde = t >= 1.0 ? p2 : Vec2(corner + t * (p2 - corner));
  std::vector<Vec2> pts = head;
  pts.push_back(opt_quad1(head[head.size() - 2], corner, q2_tilde));
  return finish(tag, std::move(pts), ctx);
}

FirstCurve recipe_quartic(FirstCase tag, const SmoothingContext& ctx, const Vec2& q2_tilde,
                          bool q1_free) {
  const Vec2& p0 = ctx.waypoints[0];
  const Vec2& p1 = ctx.waypoints[1];
  const Vec2& p2 = ctx.waypoints[2];
  const Locus l1 = q1_free ? Locus{p0, ray_point(ctx)} : Locus::point(initial_q1(ctx));
  const std::array<Locus, 4> loci{l1, Locus{p0, q2_tilde}, Locus::point(p1), Locus{p1, p2}};
  const auto q = opt_quar(p0, loci, make_search(ctx));
  return finish(tag, {p0, q[0], q[1], q[2], q[3]}, ctx);
}

Vec2 perpendicular(const Vec2& d) { return {-d.y(), d.x()}; }

FirstCurve recipe_case2(FirstCase tag, const SmoothingContext& ctx) {
  const Vec2& p0 = ctx.waypoints[0];
  const Vec2& p1 = ctx.waypoints[1];
  const Vec2& p2 = ctx.waypoints[2];
  const Vec2 a = (p1 - p0).normalized();
  const Vec2 n = perpendicular(a);
  std::optional<Vec2> q2_tilde;
  bool q1_free = false;
  if (tag == FirstCase::C2a) {
    q1_free = true;
    const auto plus = cell_exit(ctx, n);
    const auto minus = cell_exit(ctx, -n);
    if (plus && minus) {
      q2_tilde = (*plus - p0).norm() >= (*minus - p0).norm() ? plus : minus;
    } else {
      q2_tilde = plus ? plus : minus;
    }
  } else if (tag == FirstCase::C2c) {
    const Vec2 dir = side_of_line(p2, p0, p1) >= 0 ? n : Vec2(-n);
    q2_tilde = cell_exit(ctx, dir);
  } else {
    Vec2 bis = a + (initial_q1(ctx) - p0).normalized();
    if (bis.norm() <= kGeomTol) bis = n;
    q2_tilde = cell_exit(ctx, bis.normalized());
  }
  if (!q2_tilde) throw NoFeasiblePoint("no cell boundary along the q2 construction");
  return recipe_quartic(tag, ctx, *q2_tilde, q1_free);
}

bool segment_clear(const Vec2& a, const Vec2& b, const SmoothingContext& ctx) {
  for (const auto& o : ctx.obstacles) {
    if (point_segment_distance(o.center, a, b) < o.radius + ctx.clearance) return false;
  }
  return true;
}

FirstCurve run_case(FirstCase tag, const SmoothingContext& ctx) {
  const Vec2& p0 = ctx.waypoints[0];
  switch (tag) {
    case FirstCase::C1a:
      return recipe_direct(tag, ctx);
    case FirstCase::C1c:
      return recipe_quad1(tag, ctx, {p0, ray_point(ctx)});
    case FirstCase::C1b:
    case FirstCase::C3a:
      return recipe_cubic(tag, ctx);
    case FirstCase::C2a:
    case FirstCase::C2b:
    case FirstCase::C2c:
      return recipe_case2(tag, ctx);
    case FirstCase::C3b:
      return recipe_case2(FirstCase::C2b, ctx);
    case FirstCase::C4a:
      return acute_or_right(ctx) ? recipe_cubic(tag, ctx) : recipe_case2(FirstCase::C2b, ctx);
    case FirstCase::C4b:
      return recipe_quad1(tag, ctx, {p0, initial_q1(ctx), ctx.waypoints[1]});
  }
  throw NoFeasiblePoint("unknown case");
}

std::vector<Vec2> dedupe(std::vector<Vec2> pts) {
  std::vector<Vec2> out;
  for (const auto& p : pts) {
    if (out.empty() || (p - out.back()).norm() > 1e-9) out.push_back(p);
  }
  return out;
}

// Shared edge (p1, other end) of two counter-clockwise cells, if p1 is on one.
std::optional<Vec2> shared_edge_partner(const std::vector<Vec2>& a, const std::vector<Vec2>& b,
                                        const Vec2& p1) {
  auto same = [](const Vec2& x, const Vec2& y) { return (x - y).norm() <= 1e-7; };
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Vec2& u = a[i];
    const Vec2& v = a[(i + 1) % a.size()];
    for (std::size_t j = 0; j < b.size(); ++j) {
      const Vec2& s = b[j];
      const Vec2& t = b[(j + 1) % b.size()];
      const bool match = (same(u, s) && same(v, t)) || (same(u, t) && same(v, s));
      if (!match) continue;
      if (same(u, p1)) return v;
      if (same(v, p1)) return u;
    }
  }
  return std::nullopt;
}

}  // namespace

std::string to_string(FirstCase c) {
  switch (c) {
    case FirstCase::C1a: return "1a";
    case FirstCase::C1b: return "1b";
    case FirstCase::C1c: return "1c";
    case FirstCase::C2a: return "2a";
    case FirstCase::C2b: return "2b";
    case FirstCase::C2c: return "2c";
    case FirstCase::C3a: return "3a";
    case FirstCase::C3b: return "3b";
    case FirstCase::C4a: return "4a";
    case FirstCase::C4b: return "4b";
  }
  return "?";
}

Vec2 initial_q1(const SmoothingContext& ctx) {
  const Vec2& p0 = ctx.waypoints.at(0);
  const double len = std::min((ctx.waypoints.at(1) - p0).norm(), ctx.desired_speed * 1.0);
  return p0 + len * v0_direction(ctx);
}

FirstCase classify_first_case(const SmoothingContext& ctx) {
  if (ctx.waypoints.size() < 3) throw DegenerateInput("classification needs three waypoints");
  const Vec2& p0 = ctx.waypoints[0];
  const Vec2& p1 = ctx.waypoints[1];
  const Vec2& p2 = ctx.waypoints[2];
  const Vec2 q1 = initial_q1(ctx);
  const bool q1_on = on_p0p1_line(ctx, q1);
  const bool p2_on = on_p0p1_line(ctx, p2);
  const bool acute = acute_or_right(ctx);
  if (q1_on || p2_on) {
    if (q1_on && p2_on) return acute ? FirstCase::C1a : FirstCase::C2a;
    if (p2_on) return acute ? FirstCase::C1b : FirstCase::C2b;
    return acute ? FirstCase::C1c : FirstCase::C2c;
  }
  if (side_of_line(q1, p0, p1) != side_of_line(p2, p0, p1)) {
    return acute ? FirstCase::C3a : FirstCase::C3b;
  }
  if (segment_intersection(p0, q1, p1, p2) && segment_clear(p0, q1, ctx)) return FirstCase::C4b;
  return FirstCase::C4a;
}

FirstCurve design_first_curve(const SmoothingContext& ctx) {
  const FirstCase tag = classify_first_case(ctx);
  try {
    return run_case(tag, ctx);
  } catch (const NoFeasiblePoint&) {
  } catch (const DegenerateInput&) {
  }
  try {
    return recipe_cubic(tag, ctx);
  } catch (const DegenerateInput&) {
    throw NoFeasiblePoint("first curve has no feasible control points");
  }
}

std::vector<Vec2> sparse_adjust(const SmoothingContext& ctx) {
  const auto& w = ctx.waypoints;
  if (w.size() != 3 || ctx.start_cell.size() < 3 || ctx.goal_cell.size() < 3) return w;
  const auto partner = shared_edge_partner(ctx.start_cell, ctx.goal_cell, w[1]);
  if (!partner) return w;
  const Vec2 mid = 0.5 * (w[0] + w[2]);
  if (point_segment_distance(mid, w[1], *partner) > kGeomTol) return w;
  if (ctx.v0.norm() <= 1e-12) return w;
  const auto s = ray_segment_intersection(w[0], ctx.v0.normalized(), w[1], *partner);
  if (!s || *s <= kGeomTol) return w;
  const Vec2 q2 = w[0] + *s * ctx.v0.normalized();
  if ((w[2] - q2).norm() <= kGeomTol) return w;
  // q3 on q2 -> p0 at the optimal quadratic leg length seen from p2
  const Vec2 q3 = opt_quad1(w[2], q2, w[0]);
  if ((q3 - w[0]).norm() <= kMinLeg) return w;
  const std::vector<Vec2> adjusted{w[0], q3, w[2]};
  if (!segment_clear(w[0], q3, ctx) || !segment_clear(q3, w[2], ctx)) return w;
  return adjusted;
}

ExtendResult extend_curve(const std::vector<Vec2>& control, const Vec2& next,
                          const std::vector<Obstacle>& obstacles, double clearance) {
  const Vec2 from = control.back();
  const double t = farthest_clear(control, from, next, obstacles, clearance, 1e-6);
  if (t >= 1.0) return {next, false};
  const double len = (next - from).norm();
  double s = t * len;
  // leave a usable leg for the curve that starts here
  if (len - s < kMinLeg) s = std::max(0.0, len - kMinLeg);
  return {from + (len > 0.0 ? s / len : 0.0) * (next - from), true};
}

PiecewiseBezier enforce_g1(const PiecewiseBezier& pw, const std::vector<Obstacle>& obstacles,
                           double clearance) {
  PiecewiseBezier out = pw;
  out.joins.assign(out.curves.size() > 0 ? out.curves.size() - 1 : 0, Continuity::G1);
  for (std::size_t k = 0; k + 1 < out.curves.size(); ++k) {
    const BezierCurve& D = out.curves[k];
    const BezierCurve& E = out.curves[k + 1];
    if (angle_between(end_tangent(D), start_tangent(E)) <= kGeomTol) continue;

    const auto& dp = D.control_points();
    const auto& ep = E.control_points();
    const Vec2 a = dp[dp.size() - 2];
    const Vec2 b = dp.back();
    const double len = (b - a).norm();
    auto point_at = [&](double t) -> Vec2 { return a + t * (b - a); };
    auto next_pts = [&](double t) {
      std::vector<Vec2> pts;
      pts.reserve(ep.size() + 1);
      pts.push_back(point_at(t));
      pts.insert(pts.end(), ep.begin(), ep.end());
      return pts;
    };
    auto prev_pts = [&](double t) {
      std::vector<Vec2> pts = dp;
      pts.back() = point_at(t);
      return pts;
    };
    auto objective = [&](double t) {
      try {
        return std::max(max_abs_curvature(BezierCurve(prev_pts(t))),
                        max_abs_curvature(BezierCurve(next_pts(t))));
      } catch (const DegenerateTangent&) {
        return std::numeric_limits<double>::infinity();
      }
    };

    const double t_cap = len > 0.0 ? std::max(0.5, 1.0 - kMinLeg / len) : 0.5;
    const double t_floor = len > 0.0 ? std::min(0.5, kMinLeg / len) : 0.5;
    // moving the join back along D's last leg grows E's hull monotonically
    double lo = t_floor;
    if (!hull_clear(next_pts(lo), obstacles, clearance)) {
      double bad = t_floor;
      double good = t_cap;
      while ((good - bad) * len > 1e-7) {
        const double mid = 0.5 * (bad + good);
        (hull_clear(next_pts(mid), obstacles, clearance) ? good : bad) = mid;
      }
      lo = good;
    }
    const double hi = std::max(lo, t_cap);

    constexpr int kScan = 64;
    int best_i = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kScan; ++i) {
      const double v = objective(lo + (hi - lo) * i / kScan);
      if (v < best) {
        best = v;
        best_i = i;
      }
    }
    double x = lo + (hi - lo) * best_i / kScan;
    double ga = lo + (hi - lo) * std::max(0, best_i - 1) / kScan;
    double gb = lo + (hi - lo) * std::min(kScan, best_i + 1) / kScan;
    double x1 = gb - kGolden * (gb - ga);
    double x2 = ga + kGolden * (gb - ga);
    double f1 = objective(x1);
    double f2 = objective(x2);
    while ((gb - ga) * std::max(len, 1.0) > 1e-9) {
      if (f1 <= f2) {
        gb = x2;
        x2 = x1;
        f2 = f1;
        x1 = gb - kGolden * (gb - ga);
        f1 = objective(x1);
      } else {
        ga = x1;
        x1 = x2;
        f1 = f2;
        x2 = ga + kGolden * (gb - ga);
        f2 = objective(x2);
      }
    }
    if (std::min(f1, f2) < best) x = f1 <= f2 ? x1 : x2;

    BezierCurve new_d(prev_pts(x));
    BezierCurve new_e(next_pts(x));
    out.curves[k] = std::move(new_d);
    out.curves[k + 1] = std::move(new_e);
  }
  return out;
}

PiecewiseBezier smooth(const SmoothingContext& input) {
  SmoothingContext ctx = input;
  ctx.waypoints = dedupe(ctx.waypoints);
  if (ctx.waypoints.size() < 2) throw DegenerateInput("smoothing needs two distinct waypoints");
  if (ctx.waypoints.size() == 2) {
    ctx.waypoints.insert(ctx.waypoints.begin() + 1, 0.5 * (ctx.waypoints[0] + ctx.waypoints[1]));
  }
  ctx.waypoints = sparse_adjust(ctx);

  const FirstCurve first = design_first_curve(ctx);
  PiecewiseBezier pw;
  pw.curves.push_back(first.curve);

  std::vector<Vec2> rest{first.curve.back()};
  rest.insert(rest.end(), ctx.waypoints.begin() + static_cast<std::ptrdiff_t>(first.resume),
              ctx.waypoints.end());
  rest = dedupe(rest);
  if (rest.size() >= 2) {
    std::vector<Vec2> control{rest[0], rest[1]};
    for (std::size_t j = 2; j < rest.size(); ++j) {
      const ExtendResult r = extend_curve(control, rest[j], ctx.obstacles, ctx.clearance);
      if (!r.curve_break) {
        control.push_back(rest[j]);
        continue;
      }
      if ((r.point - control.back()).norm() > 1e-9) control.push_back(r.point);
      pw.curves.emplace_back(control);
      control = {r.point, rest[j]};
    }
    pw.curves.emplace_back(control);
  }
  pw.joins.assign(pw.curves.size() - 1, Continuity::G0);
  return enforce_g1(pw, ctx.obstacles, ctx.clearance);
}

}  // namespace seaplan
