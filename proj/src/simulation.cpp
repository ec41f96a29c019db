#include "seaplan/simulation.hpp"

#include "seaplan/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace seaplan {

namespace {

long step_index(double t, double dt) { return std::lround(t / dt); }

double obstacle_margin(const Vec2& p, const std::vector<WorldObstacle>& world, double t, double inflation) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& w : world) {
    if (w.reveal_time > t) continue;
    m = std::min(m, (p - w.ob.center).norm() - w.ob.radius - inflation);
  }
  return m;
}

}  // namespace

double actuator_power(const Wrench& w, double d, double k_c) {
  const ThrustSplit f = thrust_split(w.X, w.N, d);
  return k_c * (std::pow(std::abs(f.left), 1.5) + std::pow(std::abs(f.right), 1.5));
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Goal: return "goal";
    case RunStatus::Timeout: return "timeout";
    case RunStatus::Collision: return "collision";
  }
  return "unknown";
}

int RunLog::exit_code() const {
  switch (status) {
    case RunStatus::Goal: return 0;
    case RunStatus::Timeout: return 3;
    case RunStatus::Collision: return 4;
  }
  return 1;
}

double trapezoid_energy(const std::vector<StepRecord>& steps) {
  double e = 0.0;
  for (std::size_t i = 1; i < steps.size(); ++i) {
    e += 0.5 * (steps[i].power + steps[i - 1].power) * (steps[i].t - steps[i - 1].t);
  }
  return e;
}

RunLog run(const Scenario& sc) {
  sc.validate();
  RunLog log;
  log.scenario = sc.name;
  log.k_ec = sc.empc.k_ec;
  log.bounds = sc.bounds;
  log.goal = sc.goal;
  for (const auto& w : sc.obstacles) log.obstacles.push_back(w.ob);

  HorizonConfig hc = sc.horizon_config();
  if (!sc.u_d0) hc.profile.u_d0 = std::max(0.0, sc.initial.u);
  RecedingHorizonPlanner planner(hc, sc.obstacles);
  Tracker tracker(sc.tracker, sc.vessel);
  const Schedule& S = sc.schedule;
  const double dt = sc.sim.dt;
  const double inflation = sc.empc.r_c + sc.empc.r_v;

  State6 plant = sc.initial;
  DetectionState ds = detect(sc.obstacles, plant.position(), sc.sensor_range, 0.0, {});
  AugState a0;
  a0.s = plant;
  planner.initialize(a0, ds);

  const long last = step_index(sc.sim.timeout, dt);
  log.status = RunStatus::Timeout;
  for (long i = 0; i <= last; ++i) {
    const double t = static_cast<double>(i) * dt;
    if (i > 0) ds = detect(sc.obstacles, plant.position(), sc.sensor_range, t, std::move(ds));
    if (planner.has_pending() && i == step_index(planner.cycles().back().t_u, dt)) planner.activate();
    if (!planner.has_pending() && !planner.plans().empty() && i == step_index(S.t_d(planner.cycle()), dt)) {
      planner.replan(ds);
    }

    const PlannedMotion& active = planner.active();
    StepRecord rec;
    rec.t = t;
    rec.state = plant;
    rec.command = tracker.command(plant, active, t, dt);
    rec.fallback = tracker.last_fallback();
    rec.plan = static_cast<int>(planner.plans().size()) - 1;
    rec.margin = obstacle_margin(plant.position(), sc.obstacles, t, inflation);
    rec.power = actuator_power(rec.command, sc.vessel.d);
    const ReferenceTrajectory& ref = planner.references()[std::max(rec.plan, 0)];
    rec.reference = ref.at(std::max(t, ref.t0)).position();
    rec.deviation = (plant.position() - rec.reference).norm();
    rec.tracking_error = (plant.position() - active.state_at(t).s.position()).norm();
    log.steps.push_back(rec);

    const bool at_goal = (plant.position() - sc.goal).norm() <= sc.sim.goal_radius &&
                         Vec2(plant.u, plant.v).norm() < sc.sim.goal_speed;
    if (at_goal) {
      log.status = RunStatus::Goal;
      break;
    }
    if (i == last) break;
    const double h = dt / sc.sim.substeps;
    for (int s = 0; s < sc.sim.substeps; ++s) plant = integrate_plant(plant, rec.command, h, sc.vessel);
  }

  log.cycles = planner.cycles();
  for (std::size_t j = 0; j < planner.plans().size(); ++j) {
    std::vector<Vec2> pts;
    for (const auto& a : planner.plans()[j].states) pts.push_back(a.s.position());
    log.plan_paths.push_back(std::move(pts));
    std::vector<Vec2> rpts;
    for (const auto& s : planner.references()[j].samples) rpts.push_back(s.position());
    log.reference_paths.push_back(std::move(rpts));
  }

  log.energy = trapezoid_energy(log.steps);
  log.duration = log.steps.back().t;
  double se = 0.0;
  double sd = 0.0;
  double md = 0.0;
  log.min_margin = std::numeric_limits<double>::infinity();
  for (const auto& r : log.steps) {
    se += r.tracking_error * r.tracking_error;
    sd += r.deviation * r.deviation;
    md += r.deviation;
    log.min_margin = std::min(log.min_margin, r.margin);
    if (r.fallback) ++log.tracker_fallbacks;
  }
  const auto n = static_cast<double>(log.steps.size());
  log.rms_tracking_error = std::sqrt(se / n);
  log.rms_deviation = std::sqrt(sd / n);
  log.mean_deviation = md / n;
  for (const auto& c : log.cycles) {
    if (c.fallback) ++log.planner_fallbacks;
  }
  if (log.min_margin < -1e-3) log.status = RunStatus::Collision;
  return log;
}

std::vector<SweepRow> sweep_kec(const Scenario& sc, const std::vector<double>& values, std::vector<RunLog>* logs) {
  if (values.size() < 2) throw DomainError("sweep needs at least two k_ec values");
  std::vector<SweepRow> rows;
  for (double k : values) {
    Scenario s = sc;
    s.empc.k_ec = k;
    RunLog log = run(s);
    rows.push_back({k, log.energy, log.rms_deviation, log.mean_deviation, log.min_margin, log.status});
    if (logs) logs->push_back(std::move(log));
  }
  return rows;
}

}  // namespace seaplan
