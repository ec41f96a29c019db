#pragma once

#include "seaplan/bezier.hpp"
#include "seaplan/vessel.hpp"

#include <utility>
#include <vector>

namespace seaplan {

/// Lagged speed profile T_theta u_d' + u_d = U_d.
struct SpeedProfile {
  double U_d = 0.2;      // m/s
  double T_theta = 5.0;  // s
  double u_d0 = 0.0;     // m/s

  void validate() const;
};

/// Position on a piecewise curve together with the profile speed there.
struct PathParam {
  std::size_t curve = 0;
  double theta = 0.0;
  double u_d = 0.0;
  bool finished = false;  // past the end of the last curve
};

/// Uniformly sampled reference states. v_d = 0 at every sample.
struct ReferenceTrajectory {
  double t0 = 0.0;
  double dt = 0.2;
  std::vector<State6> samples;
  std::vector<PathParam> params;

  double end_time() const { return t0 + dt * static_cast<double>(samples.size() - 1); }
  double time_of(std::size_t i) const { return t0 + dt * static_cast<double>(i); }

  /// Linear interpolation with wrapped heading. Holds the last sample past
  /// the end; throws ReferenceExpired before t0.
  State6 at(double t) const;
  /// Parameter of the last sample at or before t (held past the end).
  PathParam param_at(double t) const;
};

/// One RK4 step of theta' = u_d / |P'(theta)|, T_theta u_d' = U_d - u_d.
/// theta' is clamped to 1.
std::pair<double, double> profile_step(double theta, double u_d, const BezierCurve& curve, double U_d,
                                       double T_theta, double dt);

/// (P_x, P_y, heading of P', |P'| theta_dot, 0, r(theta) theta_dot). The
/// heading falls back to the tangent direction when theta_dot is 0.
State6 reference_state(const BezierCurve& curve, double theta, double theta_dot);

/// Samples t0, t0 + dt, ..., t0 + duration starting from the beginning of
/// the first curve with u_d = prof.u_d0.
ReferenceTrajectory generate_reference(const PiecewiseBezier& pw, const SpeedProfile& prof, double t0,
                                       double duration, double dt);

/// As above, resuming from `start` (its u_d replaces prof.u_d0).
ReferenceTrajectory generate_reference(const PiecewiseBezier& pw, const SpeedProfile& prof, double t0,
                                       double duration, double dt, const PathParam& start);

}  // namespace seaplan
