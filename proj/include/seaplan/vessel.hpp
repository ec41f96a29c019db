#pragma once

#include "seaplan/geometry.hpp"

#include <Eigen/Core>

#include <cmath>

namespace seaplan {

/// Diagonal 3-DOF surface-vessel model parameters. Defaults are the
/// identified values of the test mono-hull.
struct VesselParams {
  double M1 = 493.77;  // kg
  double M2 = 455.81;  // kg
  double M3 = 55.81;   // kg m^2
  double D1 = 29.23;   // kg/s
  double D2 = 2173.7;  // kg/s
  double D3 = 17.7;    // kg m^2/s
  double d = 0.28;     // propeller moment arm (m)
  double X_lim = 39.2;       // N
  double N_lim = 10.84;      // N m
  double Xdelta_lim = 4.9;   // N/s
  double Ndelta_lim = 1.35;  // N m/s

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec8 = Eigen::Matrix<double, 8, 1>;

/// Pose in the earth-fixed frame and body-frame velocity.
struct State6 {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;  // (-pi, pi]
  double u = 0.0;
  double v = 0.0;
  double r = 0.0;

  Vec6 vec() const;
  static State6 from(const Vec6& s);
  Vec2 position() const { return {x, y}; }
  /// Earth-frame velocity.
  Vec2 velocity() const;
  bool operator==(const State6&) const = default;
};

struct Wrench {
  double X = 0.0;  // N
  double N = 0.0;  // N m
  bool operator==(const Wrench&) const = default;
};

/// Vessel state extended with the actuator force and torque.
struct AugState {
  State6 s;
  double X = 0.0;
  double N = 0.0;

  Vec8 vec() const;
  static AugState from(const Vec8& a);
  Wrench wrench() const { return {X, N}; }
  bool operator==(const AugState&) const = default;
};

struct ControlRate {
  double Xdelta = 0.0;  // N/s
  double Ndelta = 0.0;  // N m/s
  bool operator==(const ControlRate&) const = default;
};

struct ThrustSplit {
  double left = 0.0;
  double right = 0.0;
};

/// Time derivative of the 6-state under force X and torque N. Templated so
/// the planner can push automatic-differentiation scalars through it.
template <class T>
Eigen::Matrix<T, 6, 1> vessel_rhs(const Eigen::Matrix<T, 6, 1>& s, const T& X, const T& N,
                                  const VesselParams& p) {
  using std::cos;
  using std::sin;
  const T& psi = s(2);
  const T& u = s(3);
  const T& v = s(4);
  const T& r = s(5);
  const T c = cos(psi);
  const T sn = sin(psi);
  Eigen::Matrix<T, 6, 1> ds;
  ds(0) = c * u - sn * v;
  ds(1) = sn * u + c * v;
  ds(2) = r;
  ds(3) = (p.M2 * v * r - p.D1 * u + X) / p.M1;
  ds(4) = (-p.M1 * u * r - p.D2 * v) / p.M2;
  ds(5) = ((p.M1 - p.M2) * u * v - p.D3 * r + N) / p.M3;
  return ds;
}

/// Classical RK4 step of the augmented system with the rate held over dt.
/// Heading is left unwrapped so the map stays smooth.
template <class T>
Eigen::Matrix<T, 8, 1> aug_rk4_step(const Eigen::Matrix<T, 8, 1>& a, const T& Xdelta,
                                    const T& Ndelta, double dt, const VesselParams& p) {
  auto f = [&](const Eigen::Matrix<T, 8, 1>& z) {
    Eigen::Matrix<T, 8, 1> dz;
    dz.template head<6>() = vessel_rhs<T>(z.template head<6>(), z(6), z(7), p);
    dz(6) = Xdelta;
    dz(7) = Ndelta;
    return dz;
  };
  const Eigen::Matrix<T, 8, 1> k1 = f(a);
  const Eigen::Matrix<T, 8, 1> k2 = f(a + (0.5 * dt) * k1);
  const Eigen::Matrix<T, 8, 1> k3 = f(a + (0.5 * dt) * k2);
  const Eigen::Matrix<T, 8, 1> k4 = f(a + dt * k3);
  return a + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// RK4 step of the plain 6-state with the wrench held over dt.
template <class T>
Eigen::Matrix<T, 6, 1> rk4_step(const Eigen::Matrix<T, 6, 1>& s, const T& X, const T& N, double dt,
                                const VesselParams& p) {
  const Eigen::Matrix<T, 6, 1> k1 = vessel_rhs<T>(s, X, N, p);
  const Eigen::Matrix<T, 6, 1> k2 = vessel_rhs<T>(s + (0.5 * dt) * k1, X, N, p);
  const Eigen::Matrix<T, 6, 1> k3 = vessel_rhs<T>(s + (0.5 * dt) * k2, X, N, p);
  const Eigen::Matrix<T, 6, 1> k4 = vessel_rhs<T>(s + dt * k3, X, N, p);
  return s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Vec6 dynamics(const State6& s, const Wrench& tau, const VesselParams& p);

Vec8 aug_dynamics(const AugState& a, const ControlRate& cr, const VesselParams& p);

/// One RK4 step of the augmented system; psi re-wrapped.
AugState integrate(const AugState& a, const ControlRate& cr, double dt, const VesselParams& p);

/// One RK4 step of the plant under a held wrench; psi re-wrapped.
State6 integrate_plant(const State6& s, const Wrench& tau, double dt, const VesselParams& p);

ThrustSplit thrust_split(double X, double N, double d);

Wrench thrust_combine(const ThrustSplit& f, double d);

/// Earth-frame acceleration of the vessel's position.
Vec2 earth_acceleration(const State6& s, const Wrench& tau, const VesselParams& p);

}  // namespace seaplan
