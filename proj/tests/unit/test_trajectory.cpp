#include "seaplan/trajectory.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace seaplan;

namespace {

PiecewiseBezier straight(double length) {
  PiecewiseBezier pw;
  pw.curves.emplace_back(std::vector<Vec2>{{0, 0}, {0.5 * length, 0}, {length, 0}});
  return pw;
}

}  // namespace

TEST_CASE("speed lag follows the first-order response") {
  SpeedProfile prof;
  const ReferenceTrajectory ref = generate_reference(straight(1000.0), prof, 0.0, 60.0, 0.2);
  for (std::size_t i = 0; i < ref.samples.size(); ++i) {
    const double t = ref.time_of(i);
    CHECK(std::abs(ref.samples[i].u - prof.U_d * (1.0 - std::exp(-t / prof.T_theta))) <= 1e-6);
  }
}

TEST_CASE("lag fixed point and straight-line parameter advance") {
  const BezierCurve line({{0, 0}, {5, 0}, {10, 0}});
  const auto [theta, u] = profile_step(0.2, 0.2, line, 0.2, 5.0, 0.2);
  CHECK(u == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(theta - 0.2 == doctest::Approx(0.2 * 0.2 / 10.0).epsilon(1e-12));
  CHECK_THROWS_AS(profile_step(1.5, 0.2, line, 0.2, 5.0, 0.2), DomainError);
}

TEST_CASE("reference state on a quarter-turn quadratic") {
  const BezierCurve q({{1, 0}, {1, 1}, {0, 1}});
  const State6 s = reference_state(q, 0.0, 1.0);
  CHECK(s.x == doctest::Approx(1.0));
  CHECK(s.y == doctest::Approx(0.0));
  CHECK(s.psi == doctest::Approx(kPi / 2));
  CHECK(s.u == doctest::Approx(2.0));
  CHECK(s.v == 0.0);
  CHECK(s.r == doctest::Approx(1.0));
  // zero speed keeps the tangent heading
  CHECK(reference_state(q, 0.0, 0.0).psi == doctest::Approx(kPi / 2));
}

TEST_CASE("travelled arc length at the desired speed") {
  SpeedProfile prof;
  prof.u_d0 = prof.U_d;
  const double T = 200.0;
  const ReferenceTrajectory ref = generate_reference(straight(1000.0), prof, 0.0, T, 0.2);
  CHECK(std::abs(ref.samples.back().x - prof.U_d * T) <= 1e-3 * prof.U_d * T);
}

TEST_CASE("reference never overruns the curve") {
  SpeedProfile prof;
  prof.U_d = 0.5;
  PiecewiseBezier pw;
  pw.curves.emplace_back(std::vector<Vec2>{{0, 0}, {2, 0}, {2, 2}});
  pw.curves.emplace_back(std::vector<Vec2>{{2, 2}, {2, 4}, {4, 4}});
  const ReferenceTrajectory ref = generate_reference(pw, prof, 3.0, 40.0, 0.2);
  double travelled = 0.0;
  for (std::size_t i = 1; i < ref.samples.size(); ++i) {
    travelled += (ref.samples[i].position() - ref.samples[i - 1].position()).norm();
  }
  CHECK(travelled <= pw.length() + prof.U_d * ref.dt);
  CHECK(ref.params.back().finished);
  CHECK((ref.samples.back().position() - Vec2(4, 4)).norm() < 1e-9);
  CHECK(ref.samples.back().u == 0.0);
}

TEST_CASE("interpolation and expiry") {
  SpeedProfile prof;
  prof.u_d0 = 0.2;
  const ReferenceTrajectory ref = generate_reference(straight(100.0), prof, 10.0, 20.0, 0.2);
  CHECK_THROWS_AS(ref.at(9.0), ReferenceExpired);
  CHECK(ref.at(10.1).x == doctest::Approx(0.5 * (ref.samples[0].x + ref.samples[1].x)));
  CHECK(ref.at(100.0).x == ref.samples.back().x);
  CHECK(ref.end_time() == doctest::Approx(30.0));
}

TEST_CASE("resuming from a parameter continues the same samples") {
  SpeedProfile prof;
  PiecewiseBezier pw;
  pw.curves.emplace_back(std::vector<Vec2>{{0, 0}, {3, 0}, {3, 3}});
  pw.curves.emplace_back(std::vector<Vec2>{{3, 3}, {3, 6}, {6, 6}});
  const ReferenceTrajectory full = generate_reference(pw, prof, 0.0, 40.0, 0.2);
  const std::size_t k = 100;
  const ReferenceTrajectory rest = generate_reference(pw, prof, full.time_of(k), 20.0, 0.2, full.params[k]);
  for (std::size_t i = 0; i < rest.samples.size(); ++i) {
    CHECK((rest.samples[i].position() - full.samples[k + i].position()).norm() < 1e-12);
  }
}
