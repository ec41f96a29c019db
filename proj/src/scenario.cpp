#include "seaplan/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace seaplan {

namespace {

using nlohmann::ordered_json;

/// Walks one JSON object, remembers the keys read, and rejects the rest.
class Section {
public:
  Section(const ordered_json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ParseError(path_ + " must be an object");
  }

  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw ParseError("unknown key " + join(key));
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number()) throw ParseError(join(key) + " must be a number");
    out = v.get<double>();
  }

  void integer(const std::string& key, int& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) throw ParseError(join(key) + " must be an integer");
    out = v.get<int>();
  }

  void uint64(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ParseError(join(key) + " must be a non-negative integer");
    }
    out = v.get<std::uint64_t>();
  }

  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) throw ParseError(join(key) + " must be true or false");
    out = v.get<bool>();
  }

  void text(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_string()) throw ParseError(join(key) + " must be a string");
    out = v.get<std::string>();
  }

  template <std::size_t N>
  void array(const std::string& key, std::array<double, N>& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_array() || v.size() != N) {
      throw ParseError(join(key) + " must be an array of " + std::to_string(N) + " numbers");
    }
    for (std::size_t i = 0; i < N; ++i) {
      if (!v[i].is_number()) throw ParseError(join(key) + "[" + std::to_string(i) + "] must be a number");
      out[i] = v[i].get<double>();
    }
  }

  void point(const std::string& key, Vec2& out) {
    std::array<double, 2> a{out.x(), out.y()};
    array(key, a);
    out = Vec2(a[0], a[1]);
  }

  const ordered_json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
  const ordered_json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

ordered_json point_json(const Vec2& p) { return ordered_json::array({p.x(), p.y()}); }

template <std::size_t N>
ordered_json array_json(const std::array<double, N>& a) {
  ordered_json j = ordered_json::array();
  for (double v : a) j.push_back(v);
  return j;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

}  // namespace

Box default_bounds(const Vec2& start, const Vec2& goal, const std::vector<WorldObstacle>& obstacles) {
  Vec2 lo = start.cwiseMin(goal);
  Vec2 hi = start.cwiseMax(goal);
  for (const auto& o : obstacles) {
    lo = lo.cwiseMin(o.ob.center);
    hi = hi.cwiseMax(o.ob.center);
  }
  return {lo - Vec2(10.0, 10.0), hi + Vec2(10.0, 10.0)};
}

void Scenario::validate() const {
  vessel.validate();
  empc.validate();
  tracker.validate();
  schedule.validate();
  profile.validate();
  require(std::abs(empc.T_p - schedule.T_p) < 1e-9, "empc.T_p must equal schedule.T_p");
  require(!bounds.degenerate(), "environment.bounds is degenerate");
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const std::string p = "environment.obstacles[" + std::to_string(i) + "]";
    require(obstacles[i].ob.radius >= 0.0 && std::isfinite(obstacles[i].ob.radius), p + ".radius must be >= 0");
    require(obstacles[i].reveal_time >= 0.0, p + ".reveal_time must be >= 0");
    require(bounds.contains(obstacles[i].ob.center), p + ".center lies outside the bounds");
  }
  require(!u_d0 || *u_d0 >= 0.0, "speed_profile.u_d0 must be >= 0");
  require(collision_buffer >= 0.0, "planner.collision_buffer must be >= 0");
  require(obstacle_window > 0.0, "planner.obstacle_window must be positive");
  require(regen_distance > 0.0, "planner.regen_distance must be positive");
  require(sensor_range > 0.0, "sensor_range must be positive");
  require(sim.dt > 0.0, "simulation.dt must be positive");
  require(sim.substeps >= 1, "simulation.substeps must be >= 1");
  require(sim.timeout > 0.0, "simulation.timeout must be positive");
  require(sim.goal_radius > 0.0, "simulation.goal_radius must be positive");
  require(sim.goal_speed > 0.0, "simulation.goal_speed must be positive");
  require(std::abs(sim.dt - tracker.dt) < 1e-12, "simulation.dt must equal tracker.dt");
  require(std::abs(empc.dt - tracker.dt) < 1e-12, "empc.dt must equal tracker.dt");
  const double period = schedule.period() / sim.dt;
  require(std::abs(period - std::round(period)) < 1e-9 &&
              std::abs(schedule.T_c / sim.dt - std::round(schedule.T_c / sim.dt)) < 1e-9,
          "schedule times must be multiples of simulation.dt");
  Environment env = environment();
  for (auto& o : env.obstacles) o.radius = std::max(o.radius, 0.0);
  env.validate(empc.r_c + empc.r_v);
  require(std::abs(initial.x - start.x()) < 1e-12 && std::abs(initial.y - start.y()) < 1e-12,
          "initial_state position must equal environment.start");
}

Environment Scenario::environment() const {
  Environment env;
  env.bounds = bounds;
  for (const auto& o : obstacles) env.obstacles.push_back(o.ob);
  env.start = start;
  env.goal = goal;
  return env;
}

HorizonConfig Scenario::horizon_config() const {
  HorizonConfig h;
  h.schedule = schedule;
  h.empc = empc;
  h.profile = profile;
  h.global = global;
  h.global.r_c = empc.r_c;
  h.global.r_v = empc.r_v;
  h.params = vessel;
  h.bounds = bounds;
  h.goal = goal;
  h.sensor_range = sensor_range;
  h.collision_buffer = collision_buffer;
  h.obstacle_window = obstacle_window;
  h.regen_distance = regen_distance;
  return h;
}

Scenario parse_scenario(const std::string& text) {
  ordered_json root;
  try {
    root = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  Scenario sc;
  bool have_bounds = false;
  {
    Section top(root, "");
    top.text("name", sc.name);
    top.number("sensor_range", sc.sensor_range);
    top.uint64("seed", sc.seed);
    if (top.has("environment")) {
      Section env(top.raw("environment"), "environment");
      env.point("start", sc.start);
      env.point("goal", sc.goal);
      if (env.has("bounds")) {
        Section b(env.raw("bounds"), "environment.bounds");
        b.point("lo", sc.bounds.lo);
        b.point("hi", sc.bounds.hi);
        have_bounds = true;
      }
      if (env.has("obstacles")) {
        const auto& arr = env.raw("obstacles");
        if (!arr.is_array()) throw ParseError("environment.obstacles must be an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
          Section o(arr[i], "environment.obstacles[" + std::to_string(i) + "]");
          WorldObstacle w;
          w.ob.radius = std::numeric_limits<double>::quiet_NaN();
          if (!o.has("center")) throw ParseError("environment.obstacles[" + std::to_string(i) + "].center is required");
          o.point("center", w.ob.center);
          o.number("radius", w.ob.radius);
          o.number("reveal_time", w.reveal_time);
          sc.obstacles.push_back(w);
        }
      }
    }
    if (top.has("initial_state")) {
      Section s(top.raw("initial_state"), "initial_state");
      s.number("psi", sc.initial.psi);
      s.number("u", sc.initial.u);
      s.number("v", sc.initial.v);
      s.number("r", sc.initial.r);
    }
    if (top.has("vessel")) {
      Section v(top.raw("vessel"), "vessel");
      VesselParams& p = sc.vessel;
      v.number("M1", p.M1);
      v.number("M2", p.M2);
      v.number("M3", p.M3);
      v.number("D1", p.D1);
      v.number("D2", p.D2);
      v.number("D3", p.D3);
      v.number("d", p.d);
      v.number("X_lim", p.X_lim);
      v.number("N_lim", p.N_lim);
      v.number("Xdelta_lim", p.Xdelta_lim);
      v.number("Ndelta_lim", p.Ndelta_lim);
    }
    if (top.has("empc")) {
      Section e(top.raw("empc"), "empc");
      EmpcConfig& c = sc.empc;
      e.array("Q", c.Q);
      e.array("P", c.P);
      e.array("R_delta", c.R_delta);
      e.array("R_u", c.R_u);
      e.number("k_ec", c.k_ec);
      e.number("dt", c.dt);
      e.number("r_c", c.r_c);
      e.number("r_v", c.r_v);
      e.number("r_o_default", c.r_o_default);
      e.number("smoothing_eps", c.smoothing_eps);
      e.boolean("rate_increment_weighting", c.rate_increment_weighting);
      e.integer("max_iterations", c.solver.max_iterations);
      e.number("kkt_tol", c.solver.kkt_tol);
    }
    if (top.has("tracker")) {
      Section t(top.raw("tracker"), "tracker");
      TrackerConfig& c = sc.tracker;
      t.number("horizon", c.horizon);
      t.number("dt", c.dt);
      t.array("Q", c.Q);
      t.array("R", c.R);
      t.array("R_rate", c.R_rate);
      t.array("P", c.P);
      t.integer("max_iterations", c.solver.max_iterations);
    }
    if (top.has("schedule")) {
      Section s(top.raw("schedule"), "schedule");
      s.number("T_p", sc.schedule.T_p);
      s.number("T_d", sc.schedule.T_d);
      s.number("T_c", sc.schedule.T_c);
    }
    if (top.has("speed_profile")) {
      Section s(top.raw("speed_profile"), "speed_profile");
      s.number("U_d", sc.profile.U_d);
      s.number("T_theta", sc.profile.T_theta);
      if (s.has("u_d0")) {
        double v = 0.0;
        s.number("u_d0", v);
        sc.u_d0 = v;
      }
    }
    if (top.has("global")) {
      Section g(top.raw("global"), "global");
      g.number("w1", sc.global.w1);
      g.number("w2", sc.global.w2);
      if (g.has("c")) {
        double c = 0.0;
        g.number("c", c);
        sc.global.c = c;
      }
    }
    if (top.has("planner")) {
      Section p(top.raw("planner"), "planner");
      p.number("collision_buffer", sc.collision_buffer);
      p.number("obstacle_window", sc.obstacle_window);
      p.number("regen_distance", sc.regen_distance);
    }
    if (top.has("simulation")) {
      Section s(top.raw("simulation"), "simulation");
      s.number("dt", sc.sim.dt);
      s.integer("substeps", sc.sim.substeps);
      s.number("timeout", sc.sim.timeout);
      s.number("goal_radius", sc.sim.goal_radius);
      s.number("goal_speed", sc.sim.goal_speed);
    }
  }
  for (auto& o : sc.obstacles) {
    if (std::isnan(o.ob.radius)) o.ob.radius = sc.empc.r_o_default;
  }
  sc.empc.T_p = sc.schedule.T_p;
  sc.initial.x = sc.start.x();
  sc.initial.y = sc.start.y();
  sc.initial.psi = wrap_angle(sc.initial.psi);
  if (!have_bounds) sc.bounds = default_bounds(sc.start, sc.goal, sc.obstacles);
  if (sc.u_d0) sc.profile.u_d0 = *sc.u_d0;
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string dump_scenario(const Scenario& sc) {
  ordered_json j;
  j["name"] = sc.name;
  ordered_json env;
  env["bounds"] = {{"lo", point_json(sc.bounds.lo)}, {"hi", point_json(sc.bounds.hi)}};
  env["start"] = point_json(sc.start);
  env["goal"] = point_json(sc.goal);
  env["obstacles"] = ordered_json::array();
  for (const auto& o : sc.obstacles) {
    env["obstacles"].push_back(
        {{"center", point_json(o.ob.center)}, {"radius", o.ob.radius}, {"reveal_time", o.reveal_time}});
  }
  j["environment"] = env;
  j["initial_state"] = {{"psi", sc.initial.psi}, {"u", sc.initial.u}, {"v", sc.initial.v}, {"r", sc.initial.r}};
  const VesselParams& p = sc.vessel;
  j["vessel"] = {{"M1", p.M1}, {"M2", p.M2}, {"M3", p.M3}, {"D1", p.D1}, {"D2", p.D2}, {"D3", p.D3},
                 {"d", p.d}, {"X_lim", p.X_lim}, {"N_lim", p.N_lim}, {"Xdelta_lim", p.Xdelta_lim},
                 {"Ndelta_lim", p.Ndelta_lim}};
  const EmpcConfig& e = sc.empc;
  j["empc"] = {{"Q", array_json(e.Q)},
               {"P", array_json(e.P)},
               {"R_delta", array_json(e.R_delta)},
               {"R_u", array_json(e.R_u)},
               {"k_ec", e.k_ec},
               {"dt", e.dt},
               {"r_c", e.r_c},
               {"r_v", e.r_v},
               {"r_o_default", e.r_o_default},
               {"smoothing_eps", e.smoothing_eps},
               {"rate_increment_weighting", e.rate_increment_weighting},
               {"max_iterations", e.solver.max_iterations},
               {"kkt_tol", e.solver.kkt_tol}};
  const TrackerConfig& t = sc.tracker;
  j["tracker"] = {{"horizon", t.horizon}, {"dt", t.dt}, {"Q", array_json(t.Q)}, {"R", array_json(t.R)},
                  {"R_rate", array_json(t.R_rate)}, {"P", array_json(t.P)}, {"max_iterations", t.solver.max_iterations}};
  j["schedule"] = {{"T_p", sc.schedule.T_p}, {"T_d", sc.schedule.T_d}, {"T_c", sc.schedule.T_c}};
  ordered_json prof = {{"U_d", sc.profile.U_d}, {"T_theta", sc.profile.T_theta}};
  if (sc.u_d0) prof["u_d0"] = *sc.u_d0;
  j["speed_profile"] = prof;
  ordered_json g = {{"w1", sc.global.w1}, {"w2", sc.global.w2}};
  if (sc.global.c) g["c"] = *sc.global.c;
  j["global"] = g;
  j["planner"] = {{"collision_buffer", sc.collision_buffer}, {"obstacle_window", sc.obstacle_window},
                     {"regen_distance", sc.regen_distance}};
  j["sensor_range"] = sc.sensor_range;
  j["simulation"] = {{"dt", sc.sim.dt},
                     {"substeps", sc.sim.substeps},
                     {"timeout", sc.sim.timeout},
                     {"goal_radius", sc.sim.goal_radius},
                     {"goal_speed", sc.sim.goal_speed}};
  j["seed"] = sc.seed;
  return j.dump(2) + "\n";
}

void save_scenario(const Scenario& sc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << dump_scenario(sc);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace seaplan
