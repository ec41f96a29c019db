#pragma once

#include "seaplan/bezier.hpp"
#include "seaplan/env_graph.hpp"
#include "seaplan/simulation.hpp"
#include "seaplan/trajectory.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace seaplan {

std::string steps_csv(const RunLog& log);
std::string cycles_csv(const RunLog& log);
std::string summary_text(const RunLog& log);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string reference_csv(const ReferenceTrajectory& ref);
std::string roadmap_csv(const RoadmapGraph& g);

/// Totals recomputed from a steps CSV.
struct CsvTotals {
  std::size_t rows = 0;
  double energy = 0.0;
  double duration = 0.0;
};
CsvTotals parse_steps_csv(const std::string& csv);

/// Obstacles, the reference of every plan and one polyline per plan cycle,
/// plus the executed track.
std::string trajectory_svg(const RunLog& log);
/// Line chart of y against x.
std::string line_chart_svg(const std::vector<double>& x, const std::vector<double>& y, const std::string& title,
                           const std::string& x_label, const std::string& y_label);
/// Obstacles, roadmap edges, the chosen path and the smoothed curve.
std::string geometry_svg(const Box& bounds, const std::vector<Obstacle>& obstacles, const RoadmapGraph* g,
                         const std::vector<Vec2>& waypoints, const PiecewiseBezier& path);

/// Writes steps.csv, cycles.csv, summary.txt, trajectory.svg,
/// tracking_error.svg and power.svg. Throws IoError.
void export_run(const RunLog& log, const std::filesystem::path& dir);

void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace seaplan
