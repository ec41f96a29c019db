#include "seaplan/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace seaplan {

namespace {

struct Hodographs {
  BezierCurve d1;
  BezierCurve d2;
};

Hodographs hodographs(const BezierCurve& c) {
  Hodographs h;
  h.d1 = c.derivative();
  h.d2 = h.d1.derivative();
  return h;
}

double speed_at(const Hodographs& h, double theta) {
  const double s = h.d1.evaluate_unchecked(theta).norm();
  if (s <= 1e-9) throw DegenerateTangent("vanishing tangent along the reference curve");
  return s;
}

// RK4 of the coupled pair without clamping theta.
std::pair<double, double> rk4(double theta, double u_d, const Hodographs& h, double U_d, double T_theta,
                              double dt) {
  auto f = [&](double th, double u) {
    return std::pair<double, double>{u / speed_at(h, th), (U_d - u) / T_theta};
  };
  const auto [a1, b1] = f(theta, u_d);
  const auto [a2, b2] = f(theta + 0.5 * dt * a1, u_d + 0.5 * dt * b1);
  const auto [a3, b3] = f(theta + 0.5 * dt * a2, u_d + 0.5 * dt * b2);
  const auto [a4, b4] = f(theta + dt * a3, u_d + dt * b3);
  return {theta + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
          u_d + dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)};
}

State6 state_from(const BezierCurve& c, const Hodographs& h, double theta, double theta_dot) {
  const Vec2 p = c.evaluate(theta);
  const Vec2 v = h.d1.evaluate(theta);
  const Vec2 a = h.d2.evaluate(theta);
  const double sp = v.norm();
  if (sp <= 1e-9) throw DegenerateTangent("vanishing tangent along the reference curve");
  State6 s;
  s.x = p.x();
  s.y = p.y();
  s.psi = theta_dot > 0.0 ? std::atan2(v.y() * theta_dot, v.x() * theta_dot) : std::atan2(v.y(), v.x());
  s.psi = wrap_angle(s.psi);
  s.u = sp * theta_dot;
  s.v = 0.0;
  s.r = cross(v, a) / (sp * sp) * theta_dot;
  return s;
}

}  // namespace

void SpeedProfile::validate() const {
  if (!(U_d > 0.0)) throw ValidationError("speed_profile.U_d must be positive");
  if (!(T_theta > 0.0)) throw ValidationError("speed_profile.T_theta must be positive");
  if (!(u_d0 >= 0.0)) throw ValidationError("speed_profile.u_d0 must be non-negative");
}

State6 ReferenceTrajectory::at(double t) const {
  if (samples.empty()) throw ReferenceExpired("empty reference");
  if (t < t0 - 1e-9) throw ReferenceExpired("time precedes the reference");
  const double s = (t - t0) / dt;
  if (s >= static_cast<double>(samples.size() - 1)) return samples.back();
  const auto i = static_cast<std::size_t>(std::max(0.0, std::floor(s)));
  const double w = std::clamp(s - static_cast<double>(i), 0.0, 1.0);
  const State6& a = samples[i];
  const State6& b = samples[i + 1];
  State6 out;
  out.x = a.x + w * (b.x - a.x);
  out.y = a.y + w * (b.y - a.y);
  out.psi = wrap_angle(a.psi + w * wrap_angle(b.psi - a.psi));
  out.u = a.u + w * (b.u - a.u);
  out.v = 0.0;
  out.r = a.r + w * (b.r - a.r);
  return out;
}

PathParam ReferenceTrajectory::param_at(double t) const {
  if (params.empty()) throw ReferenceExpired("empty reference");
  if (t < t0 - 1e-9) throw ReferenceExpired("time precedes the reference");
  const double s = (t - t0) / dt + 1e-9;
  const auto i = std::min(params.size() - 1, static_cast<std::size_t>(std::max(0.0, std::floor(s))));
  return params[i];
}

std::pair<double, double> profile_step(double theta, double u_d, const BezierCurve& curve, double U_d,
                                       double T_theta, double dt) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("theta outside [0, 1]");
  const auto [th, u] = rk4(theta, u_d, hodographs(curve), U_d, T_theta, dt);
  return {std::min(th, 1.0), u};
}

State6 reference_state(const BezierCurve& curve, double theta, double theta_dot) {
  return state_from(curve, hodographs(curve), theta, theta_dot);
}

ReferenceTrajectory generate_reference(const PiecewiseBezier& pw, const SpeedProfile& prof, double t0,
                                       double duration, double dt) {
  PathParam start;
  start.u_d = prof.u_d0;
  return generate_reference(pw, prof, t0, duration, dt, start);
}

ReferenceTrajectory generate_reference(const PiecewiseBezier& pw, const SpeedProfile& prof, double t0,
                                       double duration, double dt, const PathParam& start) {
  if (!(duration > 0.0) || !(dt > 0.0)) throw NonpositiveDuration("duration and dt must be positive");
  if (pw.empty()) throw DegenerateInput("empty piecewise curve");
  prof.validate();
  std::vector<Hodographs> hs;
  hs.reserve(pw.curves.size());
  for (const auto& c : pw.curves) hs.push_back(hodographs(c));

  const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
  ReferenceTrajectory ref;
  ref.t0 = t0;
  ref.dt = dt;
  ref.samples.reserve(steps + 1);
  ref.params.reserve(steps + 1);

  PathParam p = start;
  if (p.curve >= pw.curves.size()) {
    p.curve = pw.curves.size() - 1;
    p.theta = 1.0;
    p.finished = true;
  }
  const BezierCurve& last = pw.curves.back();
  const Vec2 end_dir = end_tangent(last);
  State6 hold;
  hold.x = last.back().x();
  hold.y = last.back().y();
  hold.psi = std::atan2(end_dir.y(), end_dir.x());

  for (std::size_t i = 0; i <= steps; ++i) {
    if (p.finished) {
      ref.samples.push_back(hold);
    } else {
      const double th_dot = p.u_d / speed_at(hs[p.curve], p.theta);
      ref.samples.push_back(state_from(pw.curves[p.curve], hs[p.curve], p.theta, th_dot));
    }
    ref.params.push_back(p);
    if (i == steps) break;
    if (p.finished) {
      p.u_d = 0.0;
      continue;
    }
    auto [th, u] = rk4(p.theta, p.u_d, hs[p.curve], prof.U_d, prof.T_theta, dt);
    p.u_d = u;
    // carry the overshoot arc length into the following curves
    while (th > 1.0) {
      const double residual = (th - 1.0) * speed_at(hs[p.curve], 1.0);
      if (p.curve + 1 == pw.curves.size()) {
        th = 1.0;
        p.finished = true;
        p.u_d = 0.0;
        break;
      }
      ++p.curve;
      th = residual / speed_at(hs[p.curve], 0.0);
    }
    p.theta = th;
  }
  return ref;
}

}  // namespace seaplan
