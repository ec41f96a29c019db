#include "seaplan/bezier.hpp"
#include "seaplan/empc.hpp"
#include "seaplan/env_graph.hpp"
#include "seaplan/horizon.hpp"
#include "seaplan/report.hpp"
#include "seaplan/scenario.hpp"
#include "seaplan/shooting_solver.hpp"
#include "seaplan/simulation.hpp"
#include "seaplan/smoothing.hpp"
#include "seaplan/vessel.hpp"

#include <Eigen/Dense>
#include <fmt/core.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

using namespace seaplan;

namespace {

const std::filesystem::path kScenarios = SEAPLAN_SCENARIO_DIR;

// pinned tolerances
constexpr double kSweepBudget = 600.0;      // s, criterion 1
constexpr double kCostRelTol = 1e-6;        // criterion 2
constexpr double kReductionTol = 1e-12;     // criterion 3
constexpr double kQuadTolFactor = 1e-3;     // times alpha, criterion 4
constexpr int kQuadScan = 10000;
constexpr double kG1Tol = 1e-6;             // rad, criterion 5
constexpr double kMarginSlack = 1e-3;       // m, criteria 5 and 7
constexpr double kTangentTol = 1e-6;        // rad
constexpr double kFdRelTol = 1e-4;          // criterion 6
constexpr double kDefectTol = 1e-5;
constexpr double kBoxTol = 1e-6;
constexpr double kPlanMarginTol = -1e-5;
constexpr double kSurgeTol = 1e-3;          // m/s, criterion 9
constexpr double kMinOrder = 3.8;

struct Verdict {
  bool pass = false;
  std::string detail;
};

class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen_); }
  Vec2 point(double a, double b) { return {uniform(a, b), uniform(a, b)}; }

private:
  std::mt19937_64 gen_;
};

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels = 64) {
  static const double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                              0.9061798459386640};
  static const double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                              0.2369268850561891};
  const double h = (b - a) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double m = a + (p + 0.5) * h;
    for (int i = 0; i < 5; ++i) s += w[i] * f(m + 0.5 * h * x[i]);
  }
  return 0.5 * h * s;
}

// time-averaged squared jerk of the natural quintic
double jerk_oracle(double p0, double v0, double a0, double pf, double vf, double T) {
  Eigen::Matrix3d M;
  M << std::pow(T, 3), std::pow(T, 4), std::pow(T, 5), 3 * T * T, 4 * std::pow(T, 3), 5 * std::pow(T, 4), 6,
      24 * T, 60 * T * T;
  const Eigen::Vector3d c =
      M.partialPivLu().solve(Eigen::Vector3d(pf - p0 - v0 * T - 0.5 * a0 * T * T, vf - v0 - a0 * T, 0.0));
  return gauss_legendre(
             [&](double t) {
               const double j = 6 * c(0) + 24 * c(1) * t + 60 * c(2) * t * t;
               return j * j;
             },
             0.0, T) /
         T;
}

// time-averaged squared acceleration of the free-end cubic
double accel_oracle(double p0, double v0, double pf, double vf, double T) {
  Eigen::Matrix2d M;
  M << T * T, T * T * T, 2 * T, 3 * T * T;
  const Eigen::Vector2d c = M.partialPivLu().solve(Eigen::Vector2d(pf - p0 - v0 * T, vf - v0));
  return gauss_legendre(
             [&](double t) {
               const double a = 2 * c(0) + 6 * c(1) * t;
               return a * a;
             },
             0.0, T) /
         T;
}

Verdict criterion1() {
  Scenario sc = load_scenario(kScenarios / "benchmark.json");
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<SweepRow> rows = sweep_kec(sc, {0.0, 0.3, 0.6});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool ok = secs <= kSweepBudget;
  std::string d;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    d += fmt::format("k_ec {} E {:.1f} J dev {:.3f} m {}; ", rows[i].k_ec, rows[i].energy, rows[i].mean_deviation,
                     to_string(rows[i].status));
    if (i > 0) {
      ok = ok && rows[i].energy < rows[i - 1].energy;
      ok = ok && rows[i].mean_deviation >= rows[i - 1].mean_deviation;
    }
  }
  return {ok, d + fmt::format("{:.1f} s", secs)};
}

Verdict criterion2() {
  Rng rng(2002);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vec2 p0 = rng.point(-5, 5), pf = rng.point(-5, 5), v0 = rng.point(-1, 1), a0 = rng.point(-0.5, 0.5),
               vf = rng.point(-1, 1);
    const std::array<double, 2> T{rng.uniform(0.5, 20.0), rng.uniform(0.5, 20.0)};
    const double jo = jerk_oracle(p0.x(), v0.x(), a0.x(), pf.x(), vf.x(), T[0]) +
                      jerk_oracle(p0.y(), v0.y(), a0.y(), pf.y(), vf.y(), T[1]);
    const double ao =
        accel_oracle(p0.x(), v0.x(), pf.x(), vf.x(), T[0]) + accel_oracle(p0.y(), v0.y(), pf.y(), vf.y(), T[1]);
    worst = std::max(worst, std::abs(jerk_cost(p0, pf, v0, a0, vf, T) - jo) / jo);
    worst = std::max(worst, std::abs(accel_cost(p0, pf, v0, vf, T) - ao) / ao);
  }
  const double j1 = jerk_cost({0, 0}, {1, 0}, {0, 0}, {0, 0}, {0, 0}, {1.0, 1.0});
  const double a1 = accel_cost({0, 0}, {1, 0}, {0, 0}, {0, 0}, {1.0, 1.0});
  const bool ok = worst <= kCostRelTol && std::abs(j1 - 320.0) <= kCostRelTol * 320.0 &&
                  std::abs(a1 - 12.0) <= kCostRelTol * 12.0;
  return {ok, fmt::format("worst rel err {:.2e}; 1D jerk {:.9g} accel {:.9g}", worst, j1, a1)};
}

Verdict criterion3() {
  Rng rng(3003);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::array<Vec2, 4> c;
    std::array<Vec2, 5> q;
    for (auto& p : c) p = rng.point(-10, 10);
    for (auto& p : q) p = rng.point(-10, 10);
    const auto [e3, f3] = cubic_to_quadratics(c);
    const BezierCurve d3(std::vector<Vec2>(c.begin(), c.end()));
    worst = std::max({worst, (e3.evaluate(1.0) - f3.evaluate(0.0)).norm(), (e3.evaluate(1.0) - d3.evaluate(0.5)).norm()});
    const auto [e4, f4] = quartic_to_cubics(q);
    const BezierCurve d4(std::vector<Vec2>(q.begin(), q.end()));
    worst = std::max({worst, (e4.evaluate(1.0) - f4.evaluate(0.0)).norm(), (e4.evaluate(1.0) - d4.evaluate(0.5)).norm()});
  }
  // coefficient rows: feed unit inputs one at a time, then all at once
  double row_err = 0.0;
  {
    const Vec2 one(1.0, 0.0);
    const auto [e, f] = cubic_to_quadratics({one, one, one, one});
    for (const auto& p : e.control_points()) row_err = std::max(row_err, (p - one).norm());
    for (const auto& p : f.control_points()) row_err = std::max(row_err, (p - one).norm());
    const auto [e4, f4] = quartic_to_cubics({one, one, one, one, one});
    for (const auto& p : e4.control_points()) row_err = std::max(row_err, (p - one).norm());
    for (const auto& p : f4.control_points()) row_err = std::max(row_err, (p - one).norm());
  }
  const bool ok = worst <= kReductionTol * 100.0 && row_err <= kReductionTol;
  return {ok, fmt::format("max join mismatch {:.2e}; max row-sum error {:.2e}", worst, row_err)};
}

Verdict criterion4() {
  Rng rng(4004);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vec2 p0 = rng.point(-5, 5);
    const double alpha = rng.uniform(0.5, 5.0);
    const double heading = rng.uniform(-kPi, kPi);
    const Vec2 p1 = p0 + alpha * Vec2(std::cos(heading), std::sin(heading));
    const double turn = rng.uniform(0.3, kPi - 1e-3) * (rng.uniform(0, 1) < 0.5 ? -1 : 1);
    const double beta = rng.uniform(0.5, 10.0);
    const Vec2 dir(std::cos(heading + turn), std::sin(heading + turn));
    const double got = (opt_quad1(p0, p1, p1 + beta * dir) - p1).norm();
    double best_len = 0.0, best_k = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= kQuadScan; ++j) {
      const double len = beta * j / kQuadScan;
      const double k = max_abs_curvature(BezierCurve({p0, p1, p1 + len * dir}));
      if (k < best_k) {
        best_k = k;
        best_len = len;
      }
    }
    worst = std::max(worst, std::abs(got - best_len) / alpha);
  }
  double pi_err = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double a = rng.uniform(0.2, 5.0), b = rng.uniform(0.2, 12.0);
    pi_err = std::max(pi_err, std::abs(opt_quad1_length(a, b, kPi) - std::min(b, 2 * a)));
  }
  const bool ok = worst <= kQuadTolFactor && pi_err <= 1e-12;
  return {ok, fmt::format("worst |len - scan| / alpha {:.2e}; phi = pi error {:.2e}", worst, pi_err)};
}

Verdict criterion5() {
  Rng rng(5005);
  const GlobalPlanConfig gc;
  const SpeedProfile prof;
  const double clearance = gc.r_c + gc.r_v;
  double worst_join = 0.0, worst_tangent = 0.0;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 20; ++i) {
    Environment env;
    env.bounds = {{-5.0, -5.0}, {35.0, 35.0}};
    env.start = {0.0, 0.0};
    env.goal = {30.0, 30.0};
    while (env.obstacles.size() < 25) {
      const Vec2 c = rng.point(-3.0, 33.0);
      if ((c - env.start).norm() < 3.0 || (c - env.goal).norm() < 3.0) continue;
      bool close = false;
      for (const auto& o : env.obstacles) close = close || (o.center - c).norm() < 2.2;
      if (!close) env.obstacles.push_back({c, 0.15});
    }
    const double h = rng.uniform(-kPi, kPi);
    const Vec2 v0(std::cos(h), std::sin(h));
    KinematicPose pose;
    pose.position = env.start;
    const GlobalPlan gp = plan_global_detailed(env, pose, v0, gc, prof, 15.0);
    for (const double a : join_angles(gp.path)) worst_join = std::max(worst_join, a);
    worst_tangent = std::max(worst_tangent, angle_between(start_tangent(gp.path.curves.front()), v0));
    for (const auto& c : gp.path.curves) {
      for (int s = 0; s <= 1000; ++s) {
        const Vec2 p = c.evaluate(s / 1000.0);
        for (const auto& o : env.obstacles) {
          worst_margin = std::min(worst_margin, (p - o.center).norm() - o.radius - clearance);
        }
      }
    }
  }
  const bool ok = worst_join <= kG1Tol && worst_margin >= -kMarginSlack && worst_tangent <= kTangentTol;
  return {ok, fmt::format("max join {:.2e} rad; min margin beyond clearance {:.4f} m; start tangent {:.2e} rad",
                          worst_join, worst_margin, worst_tangent)};
}

ReferenceTrajectory straight_reference(double speed, double duration, double dt) {
  ReferenceTrajectory ref;
  ref.dt = dt;
  const int n = static_cast<int>(std::lround(duration / dt));
  for (int i = 0; i <= n; ++i) {
    State6 s;
    s.x = speed * i * dt;
    s.u = speed;
    ref.samples.push_back(s);
    ref.params.push_back({});
  }
  return ref;
}

Verdict criterion6() {
  Rng rng(6006);
  const VesselParams vp;
  PlanningProblem pp;
  pp.a0.s.u = 0.2;
  pp.a0.X = vp.D1 * 0.2;
  pp.reference = straight_reference(0.2, 40.0, 0.2);
  pp.obstacles = {{{3.0, 0.3}, 0.15}, {{5.0, -0.5}, 0.15}};
  EmpcConfig cfg;
  cfg.T_p = 4.0;
  const EmpcProblem prob(pp, cfg);
  const Transcription tr(prob);
  double worst_fd = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<VectorXd> xs(prob.horizon() + 1, VectorXd(8)), us(prob.horizon(), VectorXd(2));
    for (auto& x : xs) {
      x << rng.uniform(-1, 6), rng.uniform(-2, 2), rng.uniform(-3, 3), rng.uniform(-0.5, 1), rng.uniform(-0.2, 0.2),
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
      worst_fd = std::max(worst_fd, std::abs(fd - g(i)) / std::max(1.0, std::abs(fd)));
      const VectorXd de = (tr.equalities(zp) - tr.equalities(zm)) / (2 * h);
      worst_fd = std::max(worst_fd, (de - Je.col(i)).lpNorm<Eigen::Infinity>() /
                                        std::max(1.0, de.lpNorm<Eigen::Infinity>()));
      const VectorXd di = (tr.inequalities(zp) - tr.inequalities(zm)) / (2 * h);
      worst_fd = std::max(worst_fd, (di - Ji.col(i)).lpNorm<Eigen::Infinity>() /
                                        std::max(1.0, di.lpNorm<Eigen::Infinity>()));
    }
  }

  double worst_defect = 0.0, worst_box = -std::numeric_limits<double>::infinity();
  double worst_margin = std::numeric_limits<double>::infinity();
  int failures = 0;
  for (int trial = 0; trial < 20; ++trial) {
    PlanningProblem q;
    const double speed = rng.uniform(0.0, 0.25);
    q.a0.s.u = speed;
    q.a0.X = vp.D1 * speed;
    q.reference = straight_reference(speed, 40.0, 0.2);
    // far enough ahead that a swerve or a stop is reachable
    q.obstacles = {{{rng.uniform(3.5, 6.0), rng.uniform(-0.3, 0.3)}, 0.15},
                   {{rng.uniform(6.5, 9.0), rng.uniform(-1.5, 1.5)}, 0.15}};
    EmpcConfig c;
    c.k_ec = rng.uniform(0.0, 0.6);
    try {
      const PlannedMotion m = plan(q, c);
      worst_defect = std::max(worst_defect, m.max_defect);
      for (const auto& a : m.states) {
        worst_box = std::max({worst_box, std::abs(a.X) - vp.X_lim, std::abs(a.N) - vp.N_lim});
      }
      for (const auto& r : m.rates) {
        worst_box = std::max({worst_box, std::abs(r.Xdelta) - vp.Xdelta_lim, std::abs(r.Ndelta) - vp.Ndelta_lim});
      }
      worst_margin = std::min(worst_margin, min_collision_margin(m, q.obstacles, c.r_c, c.r_v));
    } catch (const SolveFailure&) {
      ++failures;
    }
  }
  // every plan committed in closed loop
  int cycles = 0;
  for (const char* name : {"benchmark.json", "ambush.json"}) {
    const RunLog log = run(load_scenario(kScenarios / name));
    for (const auto& c : log.cycles) {
      ++cycles;
      if (c.fallback) ++failures;
      worst_defect = std::max(worst_defect, c.max_defect);
      worst_box = std::max(worst_box, c.box_excess);
      worst_margin = std::min(worst_margin, c.min_margin);
    }
  }
  const bool ok = worst_fd <= kFdRelTol && failures == 0 && worst_defect <= kDefectTol && worst_box <= kBoxTol &&
                  worst_margin >= kPlanMarginTol;
  return {ok, fmt::format("fd rel err {:.2e}; 20 random plans and {} closed-loop cycles: {} failed, defect {:.2e}, "
                          "box excess {:.2e}, margin {:.2e}",
                          worst_fd, cycles, failures, worst_defect, worst_box, worst_margin)};
}

Verdict criterion7() {
  bool ok = true;
  std::string d;
  for (const char* name : {"benchmark.json", "ambush.json"}) {
    const RunLog log = run(load_scenario(kScenarios / name));
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : log.steps) m = std::min(m, s.margin);
    ok = ok && m >= -kMarginSlack && log.exit_code() == 0;
    d += fmt::format("{}: {} exit {} min margin {:.4f} m; ", log.scenario, to_string(log.status), log.exit_code(), m);
  }
  return {ok, d};
}

Verdict criterion8() {
  Scenario base = load_scenario(kScenarios / "benchmark.json");
  const RunLog log = run(base);
  bool timeline = log.cycles.size() >= 2;
  for (std::size_t i = 1; i < log.cycles.size(); ++i) {
    const CycleRecord& c = log.cycles[i];
    timeline = timeline && std::abs((c.t_s - log.cycles[i - 1].t_s) - 15.0) <= 1e-9;
    if (c.t_s <= log.duration) timeline = timeline && std::abs(c.splice_length - 25.0) <= 1e-9;
  }
  base.sim.timeout = 150.0;
  Scenario late = base;
  late.obstacles.push_back({{{5.0, 24.0}, 0.15}, 100.0});
  const RunLog a = run(base);
  const RunLog b = run(late);
  bool causal = true;
  std::size_t steps_checked = 0, plans_checked = 0;
  for (std::size_t i = 0; i < a.steps.size() && i < b.steps.size() && a.steps[i].t < 100.0 - 1e-9; ++i) {
    causal = causal && a.steps[i].state == b.steps[i].state && a.steps[i].command == b.steps[i].command;
    ++steps_checked;
  }
  for (std::size_t j = 0; j < a.cycles.size() && j < b.cycles.size() && a.cycles[j].t_d < 100.0 - 1e-9; ++j) {
    causal = causal && a.plan_paths[j] == b.plan_paths[j];
    ++plans_checked;
  }
  const bool diverged = a.plan_paths != b.plan_paths;
  return {timeline && causal && diverged,
          fmt::format("{} cycles, timeline {}; causality over {} steps and {} plans {}; later plans differ {}",
                      log.cycles.size(), timeline ? "ok" : "broken", steps_checked, plans_checked,
                      causal ? "ok" : "broken", diverged ? "yes" : "no")};
}

State6 run_plant(State6 s, const Wrench& w, double T, double dt, const VesselParams& p) {
  const int n = static_cast<int>(std::lround(T / dt));
  for (int i = 0; i < n; ++i) s = integrate_plant(s, w, dt, p);
  return s;
}

double state_gap(const State6& a, const State6& b) { return (a.vec() - b.vec()).norm(); }

Verdict criterion9() {
  const VesselParams p;
  const State6 s = run_plant(State6{}, {29.23, 0.0}, 120.0, 0.05, p);
  State6 s0;
  s0.psi = 0.3;
  s0.u = 0.4;
  s0.v = 0.05;
  s0.r = 0.1;
  const Wrench tau{20.0, 3.0};
  const State6 ref = run_plant(s0, tau, 2.0, 1e-3, p);
  const double e1 = state_gap(run_plant(s0, tau, 2.0, 0.1, p), ref);
  const double e2 = state_gap(run_plant(s0, tau, 2.0, 0.05, p), ref);
  const double e3 = state_gap(run_plant(s0, tau, 2.0, 0.025, p), ref);
  const double order = std::min(std::log2(e1 / e2), std::log2(e2 / e3));
  const bool ok = std::abs(s.u - 1.0) <= kSurgeTol && order >= kMinOrder;
  return {ok, fmt::format("u(120 s) = {:.6f} m/s; empirical order {:.3f}", s.u, order)};
}

Verdict criterion10() {
  const Scenario sc = load_scenario(kScenarios / "ambush.json");
  const RunLog a = run(sc);
  const RunLog b = run(sc);
  const bool same = steps_csv(a) == steps_csv(b) && cycles_csv(a) == cycles_csv(b) && summary_text(a) == summary_text(b);
  return {same, fmt::format("{} steps, {} cycles, logs {}", a.steps.size(), a.cycles.size(),
                            same ? "byte-identical" : "differ")};
}

}  // namespace

int main() {
  const std::vector<std::function<Verdict()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7, criterion8,
                                                       criterion9, criterion10};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i]();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    if (!v.pass) ++failed;
    fmt::print("criterion {:2}: {} {}\n", i + 1, v.pass ? "PASS" : "FAIL", v.detail);
  }
  return failed == 0 ? 0 : 1;
}
