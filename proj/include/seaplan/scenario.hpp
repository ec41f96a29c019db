#pragma once

#include "seaplan/empc.hpp"
#include "seaplan/horizon.hpp"
#include "seaplan/tracker.hpp"
#include "seaplan/trajectory.hpp"
#include "seaplan/vessel.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace seaplan {

struct SimulationConfig {
  double dt = 0.2;         // command period (s)
  int substeps = 4;        // plant RK4 steps per command period
  double timeout = 600.0;  // s
  double goal_radius = 0.5;  // m
  double goal_speed = 0.05;  // m/s
};

struct Scenario {
  std::string name = "scenario";
  Box bounds;
  std::vector<WorldObstacle> obstacles;
  Vec2 start{0.0, 0.0};
  Vec2 goal{0.0, 0.0};
  State6 initial;  // position overrides start
  VesselParams vessel;
  EmpcConfig empc;
  TrackerConfig tracker;
  Schedule schedule;
  SpeedProfile profile;
  /// Unset means "surge speed of the vehicle at the reference start".
  std::optional<double> u_d0;
  GlobalPlanConfig global;
  double collision_buffer = 0.1;
  double obstacle_window = 6.0;
  double regen_distance = 1.5;
  double sensor_range = 15.0;
  SimulationConfig sim;
  std::uint64_t seed = 0;

  /// Throws ValidationError naming the field path.
  void validate() const;
  Environment environment() const;
  HorizonConfig horizon_config() const;
};

/// Bounds covering start, goal and obstacles with a 10 m margin.
Box default_bounds(const Vec2& start, const Vec2& goal, const std::vector<WorldObstacle>& obstacles);

/// Parses the JSON scenario. Missing keys take the defaults; unknown keys
/// are rejected. Throws ParseError or ValidationError.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

std::string dump_scenario(const Scenario& sc);
void save_scenario(const Scenario& sc, const std::filesystem::path& path);

}  // namespace seaplan
