#include "seaplan/shooting_solver.hpp"
#include "seaplan/tracker.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace seaplan;

namespace {

/// Straight cruise at 0.2 m/s along +x, integrated with zero rates.
PlannedMotion cruise(double duration) {
  const VesselParams p;
  PlannedMotion m;
  m.dt = 0.2;
  AugState a;
  a.s.u = 0.2;
  a.X = p.D1 * 0.2;
  const int n = static_cast<int>(std::lround(duration / m.dt));
  for (int k = 0; k <= n; ++k) {
    m.states.push_back(a);
    if (k < n) {
      m.rates.push_back({});
      a = integrate(a, {}, m.dt, p);
    }
  }
  return m;
}

}  // namespace

TEST_CASE("a plant on the plan receives the planned wrench") {
  const VesselParams p;
  const PlannedMotion m = cruise(40.0);
  const TrackerConfig cfg;
  const Wrench w = track(m.states[10].s, m, 2.0, cfg, p);
  CHECK(std::abs(w.X - m.states[10].X) <= 1e-3);
  CHECK(std::abs(w.N - m.states[10].N) <= 1e-3);
}

TEST_CASE("a plant at rest on a resting motion gets no command") {
  const VesselParams p;
  PlannedMotion m;
  m.states.assign(51, AugState{});
  m.rates.assign(50, ControlRate{});
  const Wrench w = track(State6{}, m, 0.0, TrackerConfig{}, p);
  CHECK(std::abs(w.X) <= 1e-9);
  CHECK(std::abs(w.N) <= 1e-9);
}

TEST_CASE("a lateral offset decays under closed-loop tracking") {
  const VesselParams p;
  const PlannedMotion m = cruise(60.0);
  Tracker tracker(TrackerConfig{}, p, m.states[0].wrench());
  State6 s = m.states[0].s;
  s.y = 0.2;
  double t = 0.0;
  double err = 1.0;
  while (t < 10.0 - 1e-9) {
    const Wrench w = tracker.command(s, m, t, 0.2);
    for (int i = 0; i < 4; ++i) s = integrate_plant(s, w, 0.05, p);
    t += 0.2;
    err = (s.position() - m.state_at(t).s.position()).norm();
  }
  CHECK(err < 0.05);
}

TEST_CASE("command changes respect the rate limits") {
  const VesselParams p;
  const PlannedMotion m = cruise(40.0);
  Tracker tracker(TrackerConfig{}, p, {});
  State6 s = m.states[0].s;
  s.y = 2.0;
  Wrench prev{};
  for (int i = 0; i < 20; ++i) {
    const Wrench w = tracker.command(s, m, 0.2 * i, 0.2);
    CHECK(std::abs(w.X - prev.X) <= p.Xdelta_lim * 0.2 + 1e-12);
    CHECK(std::abs(w.N - prev.N) <= p.Ndelta_lim * 0.2 + 1e-12);
    CHECK(std::abs(w.X) <= p.X_lim);
    CHECK(std::abs(w.N) <= p.N_lim);
    prev = w;
    s = integrate_plant(s, w, 0.2, p);
  }
}

TEST_CASE("tracker configuration") {
  TrackerConfig cfg;
  CHECK(cfg.steps() == 25);
  cfg.dt = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("tracking problem derivatives agree with central differences") {
  testing::Rng rng(83);
  const VesselParams p;
  const PlannedMotion m = cruise(40.0);
  TrackerConfig cfg;
  cfg.horizon = 1.0;
  State6 s = m.states[0].s;
  s.y = 0.3;
  const TrackingProblem prob(s, m.states[0].wrench(), m, 0.0, cfg, p);
  const Transcription tr(prob);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<VectorXd> xs(prob.horizon() + 1, VectorXd(8)), us(prob.horizon(), VectorXd(2));
    for (auto& x : xs) {
      x << rng.uniform(-1, 3), rng.uniform(-1, 1), rng.uniform(-3, 3), rng.uniform(-0.5, 1), rng.uniform(-0.2, 0.2),
          rng.uniform(-0.3, 0.3), rng.uniform(-30, 30), rng.uniform(-8, 8);
    }
    for (auto& u : us) u << rng.uniform(-4, 4), rng.uniform(-1, 1);
    const VectorXd z = tr.pack(xs, us);
    const VectorXd g = tr.gradient(z);
    const MatrixXd Je = tr.equality_jacobian(z);
    const MatrixXd Ji = tr.inequality_jacobian(z);
    const double h = 1e-6;
    for (int i = 0; i < tr.num_variables(); ++i) {
      VectorXd zp = z, zm = z;
      zp(i) += h;
      zm(i) -= h;
      const double fd = (tr.objective(zp) - tr.objective(zm)) / (2 * h);
      worst = std::max(worst, std::abs(fd - g(i)) / std::max(1.0, std::abs(fd)));
      const VectorXd de = (tr.equalities(zp) - tr.equalities(zm)) / (2 * h);
      worst = std::max(worst, (de - Je.col(i)).lpNorm<Eigen::Infinity>() / std::max(1.0, de.lpNorm<Eigen::Infinity>()));
      const VectorXd di = (tr.inequalities(zp) - tr.inequalities(zm)) / (2 * h);
      worst = std::max(worst, (di - Ji.col(i)).lpNorm<Eigen::Infinity>() / std::max(1.0, di.lpNorm<Eigen::Infinity>()));
    }
  }
  CHECK(worst <= 1e-4);
}
