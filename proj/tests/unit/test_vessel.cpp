#include "seaplan/vessel.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace seaplan;

namespace {

State6 run_plant(State6 s, const Wrench& tau, double T, double dt, const VesselParams& p) {
  const int n = static_cast<int>(std::lround(T / dt));
  for (int i = 0; i < n; ++i) s = integrate_plant(s, tau, dt, p);
  return s;
}

double state_distance(const State6& a, const State6& b) {
  Vec6 d = a.vec() - b.vec();
  d(2) = wrap_angle(d(2));
  return d.norm();
}

}  // namespace

TEST_CASE("sway damping at pure sway velocity") {
  const VesselParams p;
  State6 s;
  s.v = 1.0;
  const Vec6 ds = dynamics(s, {}, p);
  CHECK(ds(4) == doctest::Approx(-2173.7 / 455.81).epsilon(1e-12));
  CHECK(ds(1) == doctest::Approx(1.0));
}

TEST_CASE("surge balance at the steady thrust") {
  const VesselParams p;
  State6 s;
  s.u = 1.0;
  CHECK(std::abs(dynamics(s, {29.23, 0.0}, p)(3)) < 1e-12);
}

TEST_CASE("steady surge from rest under constant thrust") {
  const VesselParams p;
  const State6 s = run_plant(State6{}, {29.23, 0.0}, 120.0, 0.05, p);
  CHECK(std::abs(s.u - 1.0) < 1e-3);
  CHECK(std::abs(s.v) < 1e-12);
  CHECK(std::abs(s.r) < 1e-12);
}

TEST_CASE("plant RK4 converges with fourth order") {
  const VesselParams p;
  State6 s0;
  s0.psi = 0.3;
  s0.u = 0.4;
  s0.v = 0.05;
  s0.r = 0.1;
  const Wrench tau{20.0, 3.0};
  const State6 ref = run_plant(s0, tau, 2.0, 1e-3, p);
  const double e1 = state_distance(run_plant(s0, tau, 2.0, 0.1, p), ref);
  const double e2 = state_distance(run_plant(s0, tau, 2.0, 0.05, p), ref);
  const double e3 = state_distance(run_plant(s0, tau, 2.0, 0.025, p), ref);
  CHECK(std::log2(e1 / e2) >= 3.8);
  CHECK(std::log2(e2 / e3) >= 3.8);
}

TEST_CASE("augmented step under a held rate matches a fine-step integration") {
  const VesselParams p;
  const ControlRate cr{2.0, 0.1};
  auto ramp = [&](double dt) {
    AugState a;
    const int n = static_cast<int>(std::lround(10.0 / dt));
    for (int i = 0; i < n; ++i) a = integrate(a, cr, dt, p);
    return a;
  };
  const AugState coarse = ramp(0.2);
  const AugState fine = ramp(1e-3);
  CHECK(coarse.X == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(std::abs(coarse.s.u - fine.s.u) <= 1e-5 * std::abs(fine.s.u));
}

TEST_CASE("augmented dynamics append the rates") {
  const VesselParams p;
  AugState a;
  a.X = 5.0;
  a.N = -1.0;
  const Vec8 d = aug_dynamics(a, {1.5, -0.25}, p);
  CHECK(d(6) == 1.5);
  CHECK(d(7) == -0.25);
  CHECK(d(3) == doctest::Approx(5.0 / p.M1));
}

TEST_CASE("integrate keeps the heading wrapped") {
  const VesselParams p;
  State6 s;
  s.psi = kPi - 1e-3;
  s.r = 0.5;
  const State6 n = integrate_plant(s, {}, 0.2, p);
  CHECK(n.psi <= kPi);
  CHECK(n.psi > -kPi);
  CHECK(n.psi < 0.0);
}

TEST_CASE("thrust split and combine") {
  const ThrustSplit f = thrust_split(10.0, 2.8, 0.28);
  CHECK(f.left == doctest::Approx(10.0));
  CHECK(std::abs(f.right) < 1e-12);
  testing::Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    const double X = rng.uniform(-40.0, 40.0);
    const double N = rng.uniform(-10.0, 10.0);
    const Wrench w = thrust_combine(thrust_split(X, N, 0.28), 0.28);
    CHECK(w.X == doctest::Approx(X).epsilon(1e-12));
    CHECK(w.N == doctest::Approx(N).epsilon(1e-12));
  }
}

TEST_CASE("earth acceleration matches a difference of earth velocities") {
  const VesselParams p;
  testing::Rng rng(11);
  for (int i = 0; i < 20; ++i) {
    State6 s;
    s.psi = rng.uniform(-3.0, 3.0);
    s.u = rng.uniform(-0.5, 1.0);
    s.v = rng.uniform(-0.2, 0.2);
    s.r = rng.uniform(-0.3, 0.3);
    const Wrench tau{rng.uniform(-30.0, 30.0), rng.uniform(-8.0, 8.0)};
    const double h = 1e-6;
    const Vec6 ds = dynamics(s, tau, p);
    State6 sp = State6::from(s.vec() + h * ds);
    State6 sm = State6::from(s.vec() - h * ds);
    const Vec2 fd = (sp.velocity() - sm.velocity()) / (2.0 * h);
    CHECK((earth_acceleration(s, tau, p) - fd).norm() < 1e-6);
  }
}

TEST_CASE("parameter validation names the field") {
  VesselParams p;
  p.D2 = -1.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("D2"), ValidationError);
}
