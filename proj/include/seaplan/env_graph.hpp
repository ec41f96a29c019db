#pragma once

#include "seaplan/geometry.hpp"

#include <array>
#include <optional>
#include <vector>

namespace seaplan {

/// Disc obstacle.
struct Obstacle {
  Vec2 center{0.0, 0.0};
  double radius = 0.15;  // r_o (m)
};

struct Environment {
  Box bounds;
  std::vector<Obstacle> obstacles;
  Vec2 start{0.0, 0.0};
  Vec2 goal{0.0, 0.0};

  /// Checks start and goal lie inside the bounds and clear every obstacle
  /// inflated by `inflation` (r_c + r_v).
  void validate(double inflation) const;
};

struct RoadmapEdge {
  int a = -1;
  int b = -1;
  double length = 0.0;
  double clearance = 0.0;  // d_i: min distance from the segment to any site
  bool boundary = false;   // lies on the environment frame
};

/// Voronoi roadmap of the obstacle centers with the start and goal hooked in.
struct RoadmapGraph {
  std::vector<Vec2> vertices;
  std::vector<RoadmapEdge> edges;
  std::vector<Vec2> sites;
  /// Per site: counter-clockwise cell polygon and the vertex indices on it
  /// that survive in the graph.
  std::vector<std::vector<Vec2>> cell_polygons;
  std::vector<std::vector<int>> site_cells;
  int start = -1;
  int goal = -1;
  int start_site = -1;  // -1 when there are no sites
  int goal_site = -1;

  /// Neighbor lists: (vertex, edge index), sorted by vertex index.
  std::vector<std::vector<std::pair<int, int>>> adjacency() const;
  double path_length(const std::vector<int>& path) const;
  std::vector<Vec2> path_points(const std::vector<int>& path) const;
  bool is_interior_vertex(int v, const Box& bounds) const;
};

/// Builds the bounded Voronoi roadmap. Segments that pass within
/// r_o + inflation of an obstacle center are not used to hook in start/goal.
RoadmapGraph build_roadmap(const Environment& env, double inflation = 0.77);

/// Drops edges with clearance below `min_clearance`, then isolated vertices.
RoadmapGraph prune_narrow(const RoadmapGraph& g, double min_clearance);

/// Dijkstra on edge length. Equal-length ties go to the lexicographically
/// smaller predecessor index. Throws Disconnected.
std::vector<int> shortest_path(const RoadmapGraph& g, int a, int b);

/// As above, never entering `banned` (ignored when -1).
std::vector<int> shortest_path(const RoadmapGraph& g, int a, int b, int banned);

/// Index boundaries of a path split into first/middle/remaining parts:
/// first = [0, 1], middle = [1, middle_end], remaining = [middle_end, n-1].
struct PathPartition {
  std::size_t first_end = 1;
  std::size_t middle_end = 1;
};

PathPartition partition_path(const std::vector<Vec2>& path, const Vec2& position, double sensor_range);

struct PathCandidate {
  std::vector<int> vertices;
  std::vector<Vec2> points;
  PathPartition partition;
  double J = 0.0;  // jerk of the first part
  double A = 0.0;  // acceleration of the middle part
  double L = 0.0;  // length of the remaining part
  double length = 0.0;
};

/// One candidate per start-cell vertex adjacent to the start: the shortest
/// path leaving through that vertex. Duplicates removed.
std::vector<PathCandidate> candidate_paths(const RoadmapGraph& g, const Environment& env);

/// Minimum-jerk coefficients of one axis (jerk(t) = alpha t^2/2 + beta t + gamma)
/// with free terminal acceleration.
struct JerkCoefficients {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

JerkCoefficients jerk_coefficients(double dp, double dv, double T);

/// Minimum-acceleration coefficients of one axis (a(t) = -(alpha t + beta)).
struct AccelCoefficients {
  double alpha = 0.0;
  double beta = 0.0;
};

AccelCoefficients accel_coefficients(double dp, double dv, double T);

double jerk_cost(const Vec2& p0, const Vec2& pf, const Vec2& v0, const Vec2& a0, const Vec2& vf,
                 const std::array<double, 2>& T);

double accel_cost(const Vec2& p0, const Vec2& pf, const Vec2& v0, const Vec2& vf,
                  const std::array<double, 2>& T);

/// Three-level switch: 1 on [0, c), -1 on (-c, 0), 0 elsewhere.
double priority_switch(double x, double c);

enum class PriorityOrder { Less, Equal, Greater };

/// Sign of J_d + w1 Pi(J_d) A_d + w2 Pi(J_d) Pi(A_d) L_d with d = a - b.
PriorityOrder compare_priority(const PathCandidate& a, const PathCandidate& b, double w1, double w2,
                               double c);

double priority_difference(const PathCandidate& a, const PathCandidate& b, double w1, double w2,
                           double c);

/// Position, velocity and acceleration of the vehicle in the earth frame.
struct KinematicPose {
  Vec2 position{0.0, 0.0};
  Vec2 velocity{0.0, 0.0};
  Vec2 acceleration{0.0, 0.0};
};

struct SelectionParams {
  double w1 = 1.0;
  double w2 = 1.0;
  std::optional<double> c;  // defaults to 10% of the mean candidate J
  double desired_speed = 0.2;
  double sensor_range = 15.0;
};

/// Fills J, A, L and the partition of a candidate.
void evaluate_candidate(PathCandidate& cand, const KinematicPose& pose, const SelectionParams& sp);

/// Picks the best candidate under compare_priority; ties go to the shorter
/// path, then the lexicographically smaller vertex sequence.
PathCandidate select_path(std::vector<PathCandidate> candidates, const KinematicPose& pose,
                          const SelectionParams& sp);

}  // namespace seaplan
