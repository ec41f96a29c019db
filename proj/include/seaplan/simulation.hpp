#pragma once

#include "seaplan/horizon.hpp"
#include "seaplan/scenario.hpp"

#include <string>
#include <vector>

namespace seaplan {

inline constexpr double kPowerCoefficient = 0.95;  // k_c, W per N^1.5

/// k_c (|F_l|^1.5 + |F_r|^1.5).
double actuator_power(const Wrench& w, double d, double k_c = kPowerCoefficient);

struct StepRecord {
  double t = 0.0;
  State6 state;
  Wrench command;
  int plan = -1;             // index of the active plan, -1 before the first
  double margin = 0.0;       // min distance to present obstacles beyond r_o + r_v + r_c (m)
  double power = 0.0;        // W
  Vec2 reference{0.0, 0.0};  // reference position at t
  double deviation = 0.0;    // |position - reference| (m)
  double tracking_error = 0.0;  // |position - planned position| (m)
  bool fallback = false;     // tracker fell back to the planned wrench
};

enum class RunStatus { Goal, Timeout, Collision };

std::string to_string(RunStatus s);

struct RunLog {
  std::string scenario;
  double k_ec = 0.0;
  std::vector<StepRecord> steps;
  std::vector<CycleRecord> cycles;
  std::vector<std::vector<Vec2>> plan_paths;       // per plan, knot positions
  std::vector<std::vector<Vec2>> reference_paths;  // per plan, safe reference positions
  std::vector<Obstacle> obstacles;
  Box bounds;
  Vec2 goal{0.0, 0.0};
  RunStatus status = RunStatus::Timeout;
  double energy = 0.0;  // J, trapezoidal
  double duration = 0.0;
  double rms_tracking_error = 0.0;
  double rms_deviation = 0.0;
  double mean_deviation = 0.0;
  double min_margin = 0.0;
  int tracker_fallbacks = 0;
  int planner_fallbacks = 0;

  int exit_code() const;
};

/// Trapezoidal integral of the logged power.
double trapezoid_energy(const std::vector<StepRecord>& steps);

/// Deterministic closed-loop simulation of the scenario.
RunLog run(const Scenario& sc);

struct SweepRow {
  double k_ec = 0.0;
  double energy = 0.0;
  double rms_deviation = 0.0;
  double mean_deviation = 0.0;
  double min_margin = 0.0;
  RunStatus status = RunStatus::Timeout;
};

/// One run per k_ec value, everything else unchanged.
std::vector<SweepRow> sweep_kec(const Scenario& sc, const std::vector<double>& values,
                                std::vector<RunLog>* logs = nullptr);

}  // namespace seaplan
