#include "seaplan/horizon.hpp"

#include <doctest.h>

#include <cmath>

using namespace seaplan;

namespace {

ReferenceTrajectory line_reference(double t0, double speed, double duration, double dt, double x0 = 0.0) {
  ReferenceTrajectory r;
  r.t0 = t0;
  r.dt = dt;
  const int n = static_cast<int>(std::lround(duration / dt));
  for (int i = 0; i <= n; ++i) {
    State6 s;
    s.x = x0 + speed * dt * i;
    s.u = speed;
    r.samples.push_back(s);
    PathParam p;
    p.u_d = speed;
    r.params.push_back(p);
  }
  return r;
}

PlannedMotion coasting(double t_start, int steps, const AugState& a0) {
  const VesselParams p;
  PlannedMotion m;
  m.t_start = t_start;
  m.states.push_back(a0);
  for (int k = 0; k < steps; ++k) {
    m.rates.push_back({});
    m.states.push_back(integrate(m.states.back(), {}, m.dt, p));
  }
  return m;
}

}  // namespace

TEST_CASE("schedule timeline") {
  const Schedule s;
  for (int k = 0; k < 10; ++k) {
    CHECK(s.t_s(k + 1) - s.t_s(k) == doctest::Approx(15.0));
    CHECK(s.t_u(k) == doctest::Approx(s.t_s(k + 1)));
    CHECK(s.t_d(k) - s.t_s(k) == doctest::Approx(13.0));
  }
  CHECK(s.t_s(0) == 2.0);
  CHECK(s.splice_length() == 25.0);
  Schedule bad;
  bad.T_d = 19.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("detection uses a closed ball and honours reveal times") {
  std::vector<WorldObstacle> world{{{{15.0, 0.0}, 0.15}, 0.0},
                                   {{{15.0 + 1e-9, 0.0}, 0.15}, 0.0},
                                   {{{5.0, 0.0}, 0.15}, 30.0}};
  DetectionState ds = detect(world, {0.0, 0.0}, 15.0, 0.0, {});
  CHECK(ds.is_known(0));
  CHECK_FALSE(ds.is_known(1));
  CHECK_FALSE(ds.is_known(2));
  ds = detect(world, {0.0, 0.0}, 15.0, 30.0, ds);
  CHECK(ds.is_known(2));
  CHECK(ds.known == std::vector<int>{0, 2});
  CHECK(ds.in_region({10.0, 10.0}));
  CHECK_FALSE(ds.in_region({20.0, 0.0}));
  const auto known = ds.known_obstacles(world);
  REQUIRE(known.size() == 2);
  CHECK(known[1].center.x() == 5.0);
}

TEST_CASE("safe reference keeps the candidate prefix inside the sensed region") {
  DetectionState ds;
  ds.region.push_back({{0.0, 0.0}, 3.01, 0.0});
  const ReferenceTrajectory cand = line_reference(10.0, 0.2, 20.0, 0.2);
  const SafeReference s = construct_safe_reference({}, cand, ds, 20.0);
  // samples at x = 0.04 i are inside for i <= 75
  CHECK(s.valid_prefix == 76);
  CHECK(s.padded);
  CHECK(s.ref.samples.size() == 101);
  CHECK(s.ref.samples.back().x == doctest::Approx(3.0));
  CHECK(s.ref.samples.back().u == 0.0);

  DetectionState wide;
  wide.region.push_back({{0.0, 0.0}, 100.0, 0.0});
  const ReferenceTrajectory tail = line_reference(8.0, 0.2, 2.0, 0.2, -0.4);
  const SafeReference full = construct_safe_reference(tail, cand, wide, 20.0);
  CHECK_FALSE(full.padded);
  CHECK(full.ref.t0 == 8.0);
  CHECK(full.ref.samples.size() == 10 + 101);
  CHECK(full.ref.at(10.0).x == doctest::Approx(0.0));
}

TEST_CASE("next reference start on a constant-speed line") {
  ReferenceLedger ledger;
  ledger.safe = line_reference(2.0, 0.2, 40.0, 0.2);
  const ReferenceAnchor a = next_reference_start(ledger, 17.0);
  CHECK(a.point.x() == doctest::Approx(0.2 * (17.0 - 2.0)));
  CHECK(a.t == 17.0);
  CHECK_THROWS_AS(next_reference_start(ledger, 50.0), ReferenceExpired);
  CHECK_THROWS_AS(next_reference_start(ledger, 1.0), ReferenceExpired);
}

TEST_CASE("splice spans the fixed length and is continuous") {
  const VesselParams p;
  AugState a0;
  a0.s.u = 0.2;
  a0.X = p.D1 * 0.2;
  const PlannedMotion active = coasting(2.0, 100, a0);
  const PlannedMotion next = coasting(17.0, 100, active.state_at(17.0));
  const PlannedMotion s = concatenate(active, next, 17.0, 25.0, p);
  CHECK(s.t_start == 17.0);
  CHECK(s.end_time() - s.t_start == doctest::Approx(25.0));
  CHECK(s.rates.size() + 1 == s.states.size());
  CHECK((s.state_at(17.0).s.position() - next.states[0].s.position()).norm() < 1e-12);

  AugState off = active.state_at(17.0);
  off.s.x += 0.1;
  const PlannedMotion bad = coasting(17.0, 100, off);
  CHECK_THROWS_AS(concatenate(active, bad, 17.0, 25.0, p), SpliceMismatch);
}

TEST_CASE("receding-horizon driver in open water") {
  HorizonConfig cfg;
  cfg.bounds = {{-10.0, -10.0}, {30.0, 10.0}};
  cfg.goal = {20.0, 0.0};
  RecedingHorizonPlanner planner(cfg, {});
  AugState a0;
  DetectionState ds = detect({}, {0.0, 0.0}, cfg.sensor_range, 0.0, {});
  planner.initialize(a0, ds);
  planner.activate();
  for (int k = 0; k < 3; ++k) {
    planner.replan(ds);
    planner.activate();
  }
  const auto& cycles = planner.cycles();
  REQUIRE(cycles.size() == 4);
  for (std::size_t i = 1; i < cycles.size(); ++i) {
    CHECK(cycles[i].next_t_s - cycles[i - 1].next_t_s == doctest::Approx(15.0));
    CHECK(cycles[i].splice_length == doctest::Approx(25.0));
  }
  const auto& plans = planner.plans();
  for (const auto& m : plans) CHECK(m.max_defect <= 1e-5);
  // successive plans agree where they overlap
  for (std::size_t i = 1; i < plans.size(); ++i) {
    const double t = plans[i].t_start;
    CHECK((plans[i - 1].state_at(t).s.position() - plans[i].states[0].s.position()).norm() < 1e-3);
  }
}
