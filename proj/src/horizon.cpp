#include "seaplan/horizon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace seaplan {

namespace {

constexpr double kSpliceTol = 1e-3;

std::size_t index_at(const ReferenceTrajectory& r, double t) {
  const double s = (t - r.t0) / r.dt;
  if (s <= 0.0) return 0;
  const auto i = static_cast<std::size_t>(std::llround(s));
  return std::min(i, r.samples.size() - 1);
}

/// Samples of r on [t_from, t_to] (held past the end).
ReferenceTrajectory slice(const ReferenceTrajectory& r, double t_from, double t_to) {
  ReferenceTrajectory out;
  out.t0 = t_from;
  out.dt = r.dt;
  const auto n = static_cast<std::size_t>(std::llround((t_to - t_from) / r.dt)) + 1;
  out.samples.reserve(n);
  out.params.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t_from + r.dt * static_cast<double>(i);
    const std::size_t j = index_at(r, t);
    const bool past = t > r.end_time() + 1e-9;
    State6 s = r.samples[j];
    PathParam p = r.params[j];
    if (past) {
      s.u = s.v = s.r = 0.0;
      p.u_d = 0.0;
      p.finished = true;
    }
    out.samples.push_back(s);
    out.params.push_back(p);
  }
  return out;
}

State6 hold_sample(State6 s) {
  s.u = s.v = s.r = 0.0;
  return s;
}

double distance_to_samples(const Vec2& c, const ReferenceTrajectory& r, std::size_t from) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = from; i < r.samples.size(); ++i) best = std::min(best, (r.samples[i].position() - c).norm());
  return best;
}

bool same_obstacles(const std::vector<Obstacle>& a, const std::vector<Obstacle>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].center != b[i].center || a[i].radius != b[i].radius) return false;
  }
  return true;
}

/// Re-simulates the rates of `src` from `a0` so the motion has no defects.
PlannedMotion rollout(const AugState& a0, double t_start, const PlannedMotion& src, const VesselParams& p) {
  PlannedMotion m;
  m.t_start = t_start;
  m.dt = src.dt;
  m.rates = src.rates;
  m.states.push_back(a0);
  for (const auto& r : m.rates) m.states.push_back(integrate(m.states.back(), r, m.dt, p));
  return m;
}

/// Smallest center distance minus obstacle radius over the motion.
double clearance(const PlannedMotion& m, const std::vector<Obstacle>& obstacles) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& a : m.states) {
    for (const auto& o : obstacles) best = std::min(best, (a.s.position() - o.center).norm() - o.radius);
  }
  return best;
}

/// Appends known obstacles within `dist` + radius of any state of `m` that are
/// not already listed; true when something was added.
bool add_nearby(const std::vector<Obstacle>& known, const PlannedMotion& m, double dist,
                std::vector<Obstacle>& listed) {
  bool added = false;
  for (const auto& o : known) {
    const bool present = std::any_of(listed.begin(), listed.end(), [&](const Obstacle& l) {
      return l.center == o.center && l.radius == o.radius;
    });
    if (present) continue;
    const bool near = std::any_of(m.states.begin(), m.states.end(), [&](const AugState& a) {
      return (a.s.position() - o.center).norm() <= dist + o.radius;
    });
    if (near) {
      listed.push_back(o);
      added = true;
    }
  }
  return added;
}

}  // namespace

void Schedule::validate() const {
  if (!(T_c > 0.0)) throw ValidationError("schedule.T_c must be positive");
  if (!(T_d > 0.0)) throw ValidationError("schedule.T_d must be positive");
  if (!(T_d + T_c < T_p)) throw ValidationError("schedule: T_d + T_c must be below T_p");
}

bool DetectionState::is_known(int idx) const { return std::find(known.begin(), known.end(), idx) != known.end(); }

bool DetectionState::in_region(const Vec2& p) const {
  return std::any_of(region.begin(), region.end(),
                     [&](const SensedDisc& d) { return (p - d.center).norm() <= d.radius; });
}

std::vector<Obstacle> DetectionState::known_obstacles(const std::vector<WorldObstacle>& world) const {
  std::vector<Obstacle> out;
  out.reserve(known.size());
  for (int i : known) out.push_back(world[i].ob);
  return out;
}

DetectionState detect(const std::vector<WorldObstacle>& world, const Vec2& position, double sensor_range,
                      double t, DetectionState ds) {
  if (!(sensor_range > 0.0)) throw DomainError("sensor_range must be positive");
  for (std::size_t i = 0; i < world.size(); ++i) {
    const auto idx = static_cast<int>(i);
    if (world[i].reveal_time > t || ds.is_known(idx)) continue;
    if ((world[i].ob.center - position).norm() <= sensor_range) ds.known.push_back(idx);
  }
  ds.region.push_back({position, sensor_range, t});
  return ds;
}

ReferenceAnchor next_reference_start(const ReferenceLedger& ledger, double t_next_s) {
  const ReferenceTrajectory& r = ledger.safe;
  if (r.samples.empty() || t_next_s < r.t0 - 1e-9 || t_next_s > r.end_time() + 1e-9) {
    throw ReferenceExpired("reference does not cover t = " + std::to_string(t_next_s));
  }
  ReferenceAnchor a;
  a.t = t_next_s;
  a.state = r.at(t_next_s);
  a.point = a.state.position();
  a.param = r.params[index_at(r, t_next_s)];
  return a;
}

SafeReference construct_safe_reference(const ReferenceTrajectory& prev_tail,
                                       const ReferenceTrajectory& candidate, const DetectionState& ds,
                                       double min_duration) {
  if (candidate.samples.empty()) throw DomainError("empty candidate reference");
  SafeReference out;
  ReferenceTrajectory& r = out.ref;
  r.dt = candidate.dt;
  if (!prev_tail.samples.empty()) {
    if (std::abs(prev_tail.end_time() - candidate.t0) > 1e-6 || std::abs(prev_tail.dt - candidate.dt) > 1e-12) {
      throw DomainError("previous tail must end where the candidate starts");
    }
    r.t0 = prev_tail.t0;
    r.samples.assign(prev_tail.samples.begin(), prev_tail.samples.end() - 1);
    r.params.assign(prev_tail.params.begin(), prev_tail.params.end() - 1);
  } else {
    r.t0 = candidate.t0;
  }
  std::size_t j = 0;
  while (j < candidate.samples.size() && ds.in_region(candidate.samples[j].position())) ++j;
  out.valid_prefix = j;
  for (std::size_t i = 0; i < j; ++i) {
    r.samples.push_back(candidate.samples[i]);
    r.params.push_back(candidate.params[i]);
  }
  const auto need = static_cast<std::size_t>(std::ceil(min_duration / candidate.dt - 1e-9)) + 1;
  if (j < need) {
    out.padded = true;
    State6 last = j > 0 ? candidate.samples[j - 1] : (r.samples.empty() ? candidate.samples[0] : r.samples.back());
    PathParam lp = j > 0 ? candidate.params[j - 1] : (r.params.empty() ? candidate.params[0] : r.params.back());
    last = hold_sample(last);
    lp.u_d = 0.0;
    lp.finished = true;
    for (std::size_t i = j; i < need; ++i) {
      r.samples.push_back(last);
      r.params.push_back(lp);
    }
  }
  return out;
}

PlannedMotion concatenate(const PlannedMotion& active, const PlannedMotion& next, double t_u, double length,
                          const VesselParams& p) {
  if (next.states.empty()) throw DomainError("empty motion");
  if (std::abs(active.dt - next.dt) > 1e-12) throw DomainError("motions use different sampling");
  const Vec8 a = active.state_at(next.t_start).vec();
  const Vec8 b = next.states.front().vec();
  Vec8 d = a - b;
  d(2) = wrap_angle(d(2));
  if (d.cwiseAbs().maxCoeff() > kSpliceTol) {
    throw SpliceMismatch("splice discontinuity " + std::to_string(d.cwiseAbs().maxCoeff()));
  }
  const double dt = next.dt;
  const int n = static_cast<int>(std::llround(length / dt));
  const int lead = std::max(0, static_cast<int>(std::llround((next.t_start - t_u) / dt)));
  PlannedMotion out;
  out.t_start = t_u;
  out.dt = dt;
  out.status = next.status;
  out.iterations = next.iterations;
  out.kkt_residual = next.kkt_residual;
  out.max_defect = next.max_defect;
  out.max_violation = next.max_violation;
  const int n_ext = std::max(0, n - lead);
  const PlannedMotion ext = shift_motion(next, next.t_start, n_ext, p);
  for (int k = 0; k <= n; ++k) {
    const double t = t_u + k * dt;
    if (k < lead) {
      out.states.push_back(active.state_at(t));
      out.rates.push_back(active.rate_at(t));
    } else {
      out.states.push_back(ext.states[k - lead]);
      if (k < n) out.rates.push_back(ext.rates[k - lead]);
    }
  }
  out.warm = ext.warm;
  out.rates.resize(n);
  out.econ_cost.assign(n, 0.0);
  out.tracking_cost.assign(n, 0.0);
  return out;
}

GlobalPlan plan_global_detailed(const Environment& env, const KinematicPose& pose, const Vec2& v0,
                                const GlobalPlanConfig& gc, const SpeedProfile& prof, double sensor_range) {
  Environment e = env;
  e.start = pose.position;
  const double inflation = gc.r_c + gc.r_v;
  const RoadmapGraph raw = build_roadmap(e, inflation);
  double max_ro = 0.0;
  for (const auto& o : e.obstacles) max_ro = std::max(max_ro, o.radius);
  RoadmapGraph g;
  std::vector<PathCandidate> cands;
  try {
    g = prune_narrow(raw, inflation + max_ro);
    cands = candidate_paths(g, e);
  } catch (const Disconnected&) {
    g = raw;
    cands = candidate_paths(g, e);
  }
  SelectionParams sp;
  sp.w1 = gc.w1;
  sp.w2 = gc.w2;
  sp.c = gc.c;
  sp.desired_speed = prof.U_d;
  sp.sensor_range = sensor_range;
  const PathCandidate best = select_path(std::move(cands), pose, sp);

  SmoothingContext ctx;
  ctx.waypoints = best.points;
  ctx.v0 = v0;
  ctx.obstacles = e.obstacles;
  ctx.clearance = inflation;
  ctx.desired_speed = prof.U_d;
  ctx.bounds = e.bounds;
  if (g.start_site >= 0) ctx.start_cell = g.cell_polygons[g.start_site];
  if (g.goal_site >= 0) ctx.goal_cell = g.cell_polygons[g.goal_site];
  GlobalPlan out;
  out.path = smooth(ctx);
  out.waypoints = std::move(ctx.waypoints);
  out.graph = std::move(g);
  return out;
}

PiecewiseBezier plan_global(const Environment& env, const KinematicPose& pose, const Vec2& v0,
                            const GlobalPlanConfig& gc, const SpeedProfile& prof, double sensor_range) {
  return plan_global_detailed(env, pose, v0, gc, prof, sensor_range).path;
}

RecedingHorizonPlanner::RecedingHorizonPlanner(HorizonConfig cfg, std::vector<WorldObstacle> world)
    : cfg_(std::move(cfg)), world_(std::move(world)) {
  cfg_.schedule.validate();
  cfg_.empc.validate();
  cfg_.profile.validate();
  cfg_.params.validate();
  if (std::abs(cfg_.empc.T_p - cfg_.schedule.T_p) > 1e-9) {
    throw ValidationError("empc.T_p must equal schedule.T_p");
  }
}

void RecedingHorizonPlanner::regenerate_global(const ReferenceAnchor& anchor, const std::vector<Obstacle>& known) {
  Environment env;
  env.bounds = cfg_.bounds;
  env.obstacles = known;
  env.start = anchor.point;
  env.goal = cfg_.goal;
  KinematicPose pose;
  pose.position = anchor.point;
  pose.velocity = anchor.state.velocity();
  const Vec2 v0(std::cos(anchor.state.psi), std::sin(anchor.state.psi));
  ledger_.path = plan_global(env, pose, v0, cfg_.global, cfg_.profile, cfg_.sensor_range);
  SpeedProfile prof = cfg_.profile;
  prof.u_d0 = std::max(0.0, anchor.param.u_d);
  const double travel = ledger_.path.length() / prof.U_d;
  const double duration = std::ceil((travel + 5.0 * prof.T_theta + 2.0 * cfg_.schedule.T_p) / 10.0) * 10.0;
  ledger_.global = generate_reference(ledger_.path, prof, anchor.t, duration, cfg_.empc.dt);
  ++ledger_.regenerations;
  known_at_global_ = known.size();
}

bool RecedingHorizonPlanner::needs_regeneration(const std::vector<Obstacle>& known, double t_from) const {
  if (ledger_.padded) return true;
  if (known.size() == known_at_global_) return false;
  const std::size_t from = index_at(ledger_.global, t_from);
  for (std::size_t i = known_at_global_; i < known.size(); ++i) {
    if (distance_to_samples(known[i].center, ledger_.global, from) <= cfg_.regen_distance + known[i].radius) return true;
  }
  return false;
}

std::vector<Obstacle> RecedingHorizonPlanner::window_obstacles(const std::vector<Obstacle>& known,
                                                               const ReferenceTrajectory& ref, double t0) const {
  const std::size_t from = index_at(ref, t0);
  std::vector<Obstacle> out;
  for (const auto& o : known) {
    if (distance_to_samples(o.center, ref, from) <= cfg_.obstacle_window + o.radius) out.push_back(o);
  }
  return out;
}

PlannedMotion RecedingHorizonPlanner::solve(const AugState& a0, double t_start, const std::vector<Obstacle>& known,
                                            CycleRecord& rec) {
  PlanningProblem pp;
  pp.a0 = a0;
  pp.t_start = t_start;
  pp.reference = ledger_.safe;
  pp.obstacles = window_obstacles(known, ledger_.safe, t_start);
  pp.params = cfg_.params;
  EmpcConfig ec = cfg_.empc;
  ec.r_c += cfg_.collision_buffer;
  const int H = ec.horizon();

  std::optional<PlannedMotion> warm;
  if (!active_.states.empty()) {
    warm = active_;
    // the window also covers where the previous plan is heading
    const PlannedMotion guess = shift_motion(active_, t_start, H, cfg_.params);
    add_nearby(known, guess, cfg_.obstacle_window, pp.obstacles);
    if (!same_obstacles(pp.obstacles, last_obstacles_)) warm->warm = {};
  }
  last_obstacles_ = pp.obstacles;
  PlannedMotion m;
  try {
    try {
      m = plan(pp, ec, warm);
    } catch (const SolveFailure&) {
      if (!warm) throw;
      m = plan(pp, ec);
    }
    // re-solve while the motion strays near obstacles left out of the window
    const double reach = ec.r_c + ec.r_v + 1.0;
    for (int pass = 0; pass < 3 && add_nearby(known, m, reach, pp.obstacles); ++pass) {
      m = plan(pp, ec, m);
    }
    last_obstacles_ = pp.obstacles;
    rec.status = to_string(m.status);
    rec.iterations = m.iterations;
  } catch (const SolveFailure& f) {
    rec.fallback = true;
    rec.status = to_string(f.status());
    rec.iterations = f.best().iterations;
    m = active_.states.empty() ? PlannedMotion{} : shift_motion(active_, t_start, H, cfg_.params);
    if (m.states.empty()) {
      m.t_start = t_start;
      m.dt = ec.dt;
      m.states.assign(H + 1, a0);
      m.rates.assign(H, ControlRate{});
    }
    // the unconverged iterate, re-simulated, wins when it keeps more clearance
    const PlannedMotion best = rollout(a0, t_start, f.best(), cfg_.params);
    if (clearance(best, known) > clearance(m, known)) m = best;
    m.status = f.status();
  }
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < m.states.size(); ++k) {
    for (const auto& o : known) {
      dist = std::min(dist, (m.states[k].s.position() - o.center).norm() - o.radius - cfg_.empc.r_v - cfg_.empc.r_c);
    }
  }
  rec.min_margin = dist;
  rec.max_defect = m.max_defect;
  rec.box_excess = -std::numeric_limits<double>::infinity();
  for (const auto& a : m.states) {
    rec.box_excess = std::max({rec.box_excess, std::abs(a.X) - cfg_.params.X_lim, std::abs(a.N) - cfg_.params.N_lim});
  }
  for (const auto& r : m.rates) {
    rec.box_excess = std::max(
        {rec.box_excess, std::abs(r.Xdelta) - cfg_.params.Xdelta_lim, std::abs(r.Ndelta) - cfg_.params.Ndelta_lim});
  }
  return m;
}

void RecedingHorizonPlanner::initialize(const AugState& a0, const DetectionState& ds) {
  const Schedule& S = cfg_.schedule;
  const std::vector<Obstacle> known = ds.known_obstacles(world_);
  const double t0 = S.t_s(0);

  ReferenceAnchor anchor;
  anchor.point = a0.s.position();
  anchor.state = a0.s;
  anchor.t = t0;
  anchor.param.u_d = std::max(0.0, a0.s.u);
  regenerate_global(anchor, known);

  const ReferenceTrajectory candidate = slice(ledger_.global, t0, t0 + S.T_p);
  SafeReference safe = construct_safe_reference({}, candidate, ds, S.T_p);
  ledger_.safe = std::move(safe.ref);
  ledger_.padded = safe.padded;
  ledger_.anchor = anchor;

  active_ = PlannedMotion{};
  active_.t_start = 0.0;
  active_.dt = cfg_.empc.dt;
  const int n0 = static_cast<int>(std::llround(t0 / active_.dt));
  active_.states.assign(n0 + 1, a0);
  active_.rates.assign(n0, ControlRate{});

  CycleRecord rec;
  rec.k = 0;
  rec.t_s = t0;
  rec.t_d = 0.0;
  rec.t_u = t0;
  rec.next_t_s = t0;
  rec.regenerated = true;
  rec.padded = safe.padded;
  rec.known_obstacles = static_cast<int>(known.size());
  pending_ = solve(a0, t0, known, rec);
  refs_.push_back(ledger_.safe);
  cycles_.push_back(rec);
  k_ = 0;
}

void RecedingHorizonPlanner::replan(const DetectionState& ds) {
  if (pending_) throw DomainError("previous plan not yet activated");
  const Schedule& S = cfg_.schedule;
  const int j = k_ + 1;
  const double t_next = S.t_s(j);
  const double t_det = S.t_d(k_);
  const std::vector<Obstacle> known = ds.known_obstacles(world_);

  CycleRecord rec;
  rec.k = j;
  rec.t_s = t_next;
  rec.t_d = t_det;
  rec.t_u = S.t_u(k_);
  rec.next_t_s = t_next;
  rec.known_obstacles = static_cast<int>(known.size());

  const AugState a0 = active_.state_at(t_next);
  const ReferenceAnchor anchor = next_reference_start(ledger_, t_next);
  if (needs_regeneration(known, t_next)) {
    try {
      regenerate_global(anchor, known);
      rec.regenerated = true;
    } catch (const Error&) {
      // keep the previous global reference; the safe prefix still applies
      rec.status = "global_failed";
    }
  }
  const double tail_from = std::max(ledger_.safe.t0, t_det);
  const ReferenceTrajectory prev_tail = slice(ledger_.safe, tail_from, t_next);
  const ReferenceTrajectory candidate = slice(ledger_.global, t_next, t_next + S.T_p);
  SafeReference safe = construct_safe_reference(prev_tail, candidate, ds, S.T_p);
  rec.padded = safe.padded;
  ledger_.safe = std::move(safe.ref);
  ledger_.padded = safe.padded;
  ledger_.anchor = anchor;
  const std::string global_status = rec.status;
  pending_ = solve(a0, t_next, known, rec);
  if (!global_status.empty()) rec.status = global_status + "+" + rec.status;
  refs_.push_back(ledger_.safe);
  cycles_.push_back(rec);
}

void RecedingHorizonPlanner::activate() {
  if (!pending_) throw DomainError("no pending plan");
  const Schedule& S = cfg_.schedule;
  const double t_u = cycles_.back().t_u;
  active_ = concatenate(active_, *pending_, t_u, S.splice_length(), cfg_.params);
  cycles_.back().splice_length = active_.end_time() - active_.t_start;
  plans_.push_back(std::move(*pending_));
  pending_.reset();
  if (cycles_.size() > 1) ++k_;
}

}  // namespace seaplan
