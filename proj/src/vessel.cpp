#include "seaplan/vessel.hpp"

#include <string>

namespace seaplan {

void VesselParams::validate() const {
  auto require_positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError(std::string("vessel.") + name + " must be positive");
    }
  };
  require_positive(M1, "M1");
  require_positive(M2, "M2");
  require_positive(M3, "M3");
  require_positive(D1, "D1");
  require_positive(D2, "D2");
  require_positive(D3, "D3");
  require_positive(d, "d");
  require_positive(X_lim, "X_lim");
  require_positive(N_lim, "N_lim");
  require_positive(Xdelta_lim, "Xdelta_lim");
  require_positive(Ndelta_lim, "Ndelta_lim");
}

Vec6 State6::vec() const {
  Vec6 s;
  s << x, y, psi, u, v, r;
  return s;
}

State6 State6::from(const Vec6& s) { return {s(0), s(1), wrap_angle(s(2)), s(3), s(4), s(5)}; }

Vec2 State6::velocity() const {
  const double c = std::cos(psi);
  const double sn = std::sin(psi);
  return {c * u - sn * v, sn * u + c * v};
}

Vec8 AugState::vec() const {
  Vec8 a;
  a.head<6>() = s.vec();
  a(6) = X;
  a(7) = N;
  return a;
}

AugState AugState::from(const Vec8& a) { return {State6::from(a.head<6>()), a(6), a(7)}; }

Vec6 dynamics(const State6& s, const Wrench& tau, const VesselParams& p) {
  return vessel_rhs<double>(s.vec(), tau.X, tau.N, p);
}

Vec8 aug_dynamics(const AugState& a, const ControlRate& cr, const VesselParams& p) {
  Vec8 da;
  da.head<6>() = dynamics(a.s, a.wrench(), p);
  da(6) = cr.Xdelta;
  da(7) = cr.Ndelta;
  return da;
}

AugState integrate(const AugState& a, const ControlRate& cr, double dt, const VesselParams& p) {
  return AugState::from(aug_rk4_step<double>(a.vec(), cr.Xdelta, cr.Ndelta, dt, p));
}

State6 integrate_plant(const State6& s, const Wrench& tau, double dt, const VesselParams& p) {
  return State6::from(rk4_step<double>(s.vec(), tau.X, tau.N, dt, p));
}

ThrustSplit thrust_split(double X, double N, double d) {
  return {0.5 * (X + N / d), 0.5 * (X - N / d)};
}

Wrench thrust_combine(const ThrustSplit& f, double d) {
  return {f.left + f.right, (f.left - f.right) * d};
}

Vec2 earth_acceleration(const State6& s, const Wrench& tau, const VesselParams& p) {
  const Vec6 ds = dynamics(s, tau, p);
  const double c = std::cos(s.psi);
  const double sn = std::sin(s.psi);
  // d/dt (R(psi) [u, v]) = R(psi) [u' - v r, v' + u r]
  const double ab = ds(3) - s.v * s.r;
  const double bb = ds(4) + s.u * s.r;
  return {c * ab - sn * bb, sn * ab + c * bb};
}

}  // namespace seaplan
