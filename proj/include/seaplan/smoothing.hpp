#pragma once

#include "seaplan/bezier.hpp"
#include "seaplan/env_graph.hpp"

#include <string>
#include <vector>

namespace seaplan {

struct SmoothingContext {
  std::vector<Vec2> waypoints;
  Vec2 v0{0.0, 0.0};  // initial velocity direction; zero falls back to p0->p1
  std::vector<Obstacle> obstacles;
  double clearance = 0.77;  // r_c + r_v
  double desired_speed = 0.2;
  /// Counter-clockwise cells containing the first and last waypoint. Empty
  /// means "use the bounds".
  std::vector<Vec2> start_cell;
  std::vector<Vec2> goal_cell;
  Box bounds;
};

enum class FirstCase { C1a, C1b, C1c, C2a, C2b, C2c, C3a, C3b, C4a, C4b };

std::string to_string(FirstCase c);

/// Point on the v0 ray at min(|p0 p1|, desired_speed * 1 s) from p0.
Vec2 initial_q1(const SmoothingContext& ctx);

FirstCase classify_first_case(const SmoothingContext& ctx);

struct FirstCurve {
  FirstCase tag = FirstCase::C1a;
  BezierCurve curve;
  /// The rest of the path is curve.back() followed by waypoints[resume..].
  std::size_t resume = 0;
};

/// Builds the first curve of the matched case; falls back to the cubic
/// recipe when the case recipe has no feasible point. Throws NoFeasiblePoint.
FirstCurve design_first_curve(const SmoothingContext& ctx);

/// Three-waypoint shortcut through the edge shared by the start and goal
/// cells. Returns the waypoints unchanged when the preconditions fail or the
/// shortcut would collide.
std::vector<Vec2> sparse_adjust(const SmoothingContext& ctx);

struct ExtendResult {
  Vec2 point{0.0, 0.0};
  bool curve_break = false;
};

/// Adds `next` to the control set if the hull stays clear; otherwise returns
/// the farthest clear point on the last segment and flags a break.
ExtendResult extend_curve(const std::vector<Vec2>& control, const Vec2& next,
                          const std::vector<Obstacle>& obstacles, double clearance);

/// Moves every non-G1 join onto the incoming curve's last control leg,
/// minimizing the larger of the two adjacent max curvatures.
PiecewiseBezier enforce_g1(const PiecewiseBezier& pw, const std::vector<Obstacle>& obstacles,
                           double clearance);

/// Full pipeline: sparse_adjust, first curve, greedy remaining curves, G1
/// repair.
PiecewiseBezier smooth(const SmoothingContext& ctx);

}  // namespace seaplan
