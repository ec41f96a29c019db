#include "seaplan/report.hpp"
#include "seaplan/scenario.hpp"
#include "seaplan/simulation.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <iostream>
#include <sstream>

namespace {

using namespace seaplan;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitValidation = 2;

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("--kec: cannot parse '" + item + "'");
    }
  }
  return out;
}

int do_plan(const Scenario& sc, const std::filesystem::path& out) {
  Environment env = sc.environment();
  env.obstacles.clear();
  for (const auto& w : sc.obstacles) {
    if (w.reveal_time <= 0.0) env.obstacles.push_back(w.ob);
  }
  KinematicPose pose;
  pose.position = sc.start;
  pose.velocity = sc.initial.velocity();
  const Vec2 v0(std::cos(sc.initial.psi), std::sin(sc.initial.psi));
  const HorizonConfig hc = sc.horizon_config();
  const GlobalPlan gp = plan_global_detailed(env, pose, v0, hc.global, sc.profile, sc.sensor_range);
  SpeedProfile prof = sc.profile;
  prof.u_d0 = sc.u_d0.value_or(std::max(0.0, sc.initial.u));
  const double duration = std::ceil((gp.path.length() / prof.U_d + 5.0 * prof.T_theta) / 10.0) * 10.0;
  const ReferenceTrajectory ref = generate_reference(gp.path, prof, 0.0, duration, sc.empc.dt);

  std::filesystem::create_directories(out);
  write_file(out / "roadmap.csv", roadmap_csv(gp.graph));
  std::string wp = "x,y\n";
  for (const auto& p : gp.waypoints) wp += fmt::format("{:.17g},{:.17g}\n", p.x(), p.y());
  write_file(out / "waypoints.csv", wp);
  std::string cp = "curve,index,x,y\n";
  for (std::size_t i = 0; i < gp.path.curves.size(); ++i) {
    const auto& pts = gp.path.curves[i].control_points();
    for (std::size_t j = 0; j < pts.size(); ++j) cp += fmt::format("{},{},{:.17g},{:.17g}\n", i, j, pts[j].x(), pts[j].y());
  }
  write_file(out / "curves.csv", cp);
  write_file(out / "reference.csv", reference_csv(ref));
  write_file(out / "plan.svg", geometry_svg(sc.bounds, env.obstacles, &gp.graph, gp.waypoints, gp.path));
  std::cout << fmt::format("curves {} length_m {:.6f} reference_samples {}\n", gp.path.curves.size(),
                           gp.path.length(), ref.samples.size());
  return kExitOk;
}

int do_run(const Scenario& sc, const std::filesystem::path& out) {
  const RunLog log = run(sc);
  export_run(log, out);
  std::cout << summary_text(log);
  return log.exit_code();
}

int do_sweep(const Scenario& sc, const std::vector<double>& values, const std::filesystem::path& out) {
  std::vector<RunLog> logs;
  const std::vector<SweepRow> rows = sweep_kec(sc, values, &logs);
  std::filesystem::create_directories(out);
  for (std::size_t i = 0; i < logs.size(); ++i) export_run(logs[i], out / fmt::format("run_{}", i));
  write_file(out / "sweep.csv", sweep_csv(rows));
  std::cout << sweep_csv(rows);
  int code = kExitOk;
  for (const auto& l : logs) code = std::max(code, l.exit_code());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-aware receding-horizon motion planner for surface vessels"};
  app.require_subcommand(1);
  std::string scenario_path;
  std::string out_dir = "out";
  std::string kec_list = "0,0.3,0.6";
  std::uint64_t seed = 0;
  double timeout = -1.0;
  bool seed_set = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "seed recorded in the scenario")->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--timeout", timeout, "simulation timeout (s)");
  };
  CLI::App* plan = app.add_subcommand("plan", "global stage only: roadmap, smoothing, reference");
  CLI::App* run_cmd = app.add_subcommand("run", "closed-loop simulation");
  CLI::App* sweep = app.add_subcommand("sweep", "closed-loop runs over a k_ec list");
  CLI::App* validate = app.add_subcommand("validate", "scenario lint");
  for (CLI::App* sub : {plan, run_cmd, sweep, validate}) add_common(sub);
  sweep->add_option("--kec", kec_list, "comma-separated k_ec values");

  CLI11_PARSE(app, argc, argv);

  try {
    Scenario sc = load_scenario(scenario_path);
    if (seed_set) sc.seed = seed;
    if (timeout >= 0.0) {
      sc.sim.timeout = timeout;
      sc.validate();
    }
    if (*validate) {
      std::cout << "valid " << sc.name << "\n";
      return kExitOk;
    }
    if (*plan) return do_plan(sc, out_dir);
    if (*run_cmd) return do_run(sc, out_dir);
    if (*sweep) return do_sweep(sc, parse_list(kec_list), out_dir);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
