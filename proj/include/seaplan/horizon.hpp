#pragma once

#include "seaplan/empc.hpp"
#include "seaplan/env_graph.hpp"
#include "seaplan/smoothing.hpp"
#include "seaplan/trajectory.hpp"

#include <optional>
#include <string>
#include <vector>

namespace seaplan {

/// Receding-horizon timing constants. Cycle k executes from t_s(k) and the
/// next plan is computed over [t_d(k), t_u(k)].
struct Schedule {
  double T_p = 20.0;  // s
  double T_d = 13.0;  // s
  double T_c = 2.0;   // s

  void validate() const;
  double period() const { return T_d + T_c; }
  /// Execution start of plan k (the first plan is ready at T_c).
  double t_s(int k) const { return T_c + period() * k; }
  double t_d(int k) const { return t_s(k) + T_d; }
  double t_u(int k) const { return t_d(k) + T_c; }
  /// Length of the spliced motion, 2 T_p - T_d - T_c.
  double splice_length() const { return 2.0 * T_p - T_d - T_c; }
};

/// Obstacle present in the world from reveal_time on.
struct WorldObstacle {
  Obstacle ob;
  double reveal_time = 0.0;
};

struct SensedDisc {
  Vec2 center{0.0, 0.0};
  double radius = 0.0;
  double time = 0.0;
};

/// Known obstacles (indices into the world list, in detection order) and the
/// sensed region.
struct DetectionState {
  std::vector<int> known;
  std::vector<SensedDisc> region;

  bool is_known(int idx) const;
  bool in_region(const Vec2& p) const;
  std::vector<Obstacle> known_obstacles(const std::vector<WorldObstacle>& world) const;
};

/// Adds every present obstacle whose center lies within sensor_range
/// (closed ball) and appends the sensed disc. Returns the updated state.
DetectionState detect(const std::vector<WorldObstacle>& world, const Vec2& position, double sensor_range,
                      double t, DetectionState ds);

struct ReferenceAnchor {
  Vec2 point{0.0, 0.0};
  State6 state;
  PathParam param;
  double t = 0.0;
};

struct ReferenceLedger {
  PiecewiseBezier path;              // path of the global reference
  ReferenceTrajectory global;        // candidate source
  ReferenceTrajectory safe;          // current safe reference
  std::optional<ReferenceAnchor> anchor;
  bool padded = false;
  int regenerations = 0;
};

/// State of the safe reference at t_next_s. Throws ReferenceExpired when the
/// reference does not cover it.
ReferenceAnchor next_reference_start(const ReferenceLedger& ledger, double t_next_s);

struct SafeReference {
  ReferenceTrajectory ref;
  std::size_t valid_prefix = 0;  // candidate samples kept
  bool padded = false;
};

/// prev_tail (ending at the candidate start) followed by the longest prefix
/// of the candidate inside the detected region, held at the last safe sample
/// until the candidate part spans at least min_duration.
SafeReference construct_safe_reference(const ReferenceTrajectory& prev_tail,
                                       const ReferenceTrajectory& candidate, const DetectionState& ds,
                                       double min_duration);

/// Motion over [t_u, t_u + length]: active before next.t_start, then next,
/// then next continued with zero rates. Throws SpliceMismatch when the two
/// motions disagree at next.t_start by more than 1e-3.
PlannedMotion concatenate(const PlannedMotion& active, const PlannedMotion& next, double t_u, double length,
                          const VesselParams& p);

struct GlobalPlanConfig {
  double r_c = 0.0;
  double r_v = 0.77;
  double w1 = 1.0;
  double w2 = 1.0;
  std::optional<double> c;
};

struct GlobalPlan {
  RoadmapGraph graph;  // after pruning
  std::vector<Vec2> waypoints;
  PiecewiseBezier path;
};

/// Roadmap, candidate selection and smoothing from `pose` to env.goal with
/// the initial direction v0. Throws on an infeasible scene.
GlobalPlan plan_global_detailed(const Environment& env, const KinematicPose& pose, const Vec2& v0,
                                const GlobalPlanConfig& gc, const SpeedProfile& prof, double sensor_range);

PiecewiseBezier plan_global(const Environment& env, const KinematicPose& pose, const Vec2& v0,
                            const GlobalPlanConfig& gc, const SpeedProfile& prof, double sensor_range);

struct HorizonConfig {
  Schedule schedule;
  EmpcConfig empc;
  SpeedProfile profile;
  GlobalPlanConfig global;
  VesselParams params;
  Box bounds;
  Vec2 goal{0.0, 0.0};
  double sensor_range = 15.0;
  /// Extra distance added to r_c inside the planner only.
  double collision_buffer = 0.1;
  /// Obstacles farther than this from every reference sample of the window
  /// are left out of the planning problem.
  double obstacle_window = 6.0;
  /// A newly known obstacle closer than this plus its radius to the remaining
  /// global reference triggers regeneration.
  double regen_distance = 1.5;
};

struct CycleRecord {
  int k = 0;
  double t_s = 0.0;
  double t_d = 0.0;
  double t_u = 0.0;
  double next_t_s = 0.0;
  double splice_length = 0.0;
  int iterations = 0;
  bool fallback = false;
  bool regenerated = false;
  bool padded = false;
  int known_obstacles = 0;
  double min_margin = 0.0;  // planned motion, m
  double max_defect = 0.0;
  double box_excess = 0.0;  // largest actuator or rate bound excess
  std::string status;
};

/// Deterministic Algorithm-1 driver. The caller advances time and calls
/// replan() at each t_d(k) and activate() at each t_u(k).
class RecedingHorizonPlanner {
public:
  RecedingHorizonPlanner(HorizonConfig cfg, std::vector<WorldObstacle> world);

  /// First plan, computed at t = 0 from the initial state for the execution
  /// start T_c.
  void initialize(const AugState& a0, const DetectionState& ds);

  /// Computes the plan that starts at t_s(k + 1) from the obstacles known now
  /// (snapshot of ds). The result is pending until activate().
  void replan(const DetectionState& ds);

  /// Splices the pending plan into the active motion at t_u(k) and advances k.
  void activate();

  const PlannedMotion& active() const { return active_; }
  const ReferenceLedger& ledger() const { return ledger_; }
  const std::vector<CycleRecord>& cycles() const { return cycles_; }
  const std::vector<ReferenceTrajectory>& references() const { return refs_; }
  const std::vector<PlannedMotion>& plans() const { return plans_; }
  int cycle() const { return k_; }
  const HorizonConfig& config() const { return cfg_; }
  bool has_pending() const { return pending_.has_value(); }

private:
  PlannedMotion solve(const AugState& a0, double t_start, const std::vector<Obstacle>& known,
                      CycleRecord& rec);
  void regenerate_global(const ReferenceAnchor& anchor, const std::vector<Obstacle>& known);
  bool needs_regeneration(const std::vector<Obstacle>& known, double t_from) const;
  std::vector<Obstacle> window_obstacles(const std::vector<Obstacle>& known,
                                         const ReferenceTrajectory& ref, double t0) const;

  HorizonConfig cfg_;
  std::vector<WorldObstacle> world_;
  ReferenceLedger ledger_;
  PlannedMotion active_;
  std::optional<PlannedMotion> pending_;
  std::vector<Obstacle> last_obstacles_;
  std::size_t known_at_global_ = 0;
  int k_ = 0;
  std::vector<CycleRecord> cycles_;
  std::vector<ReferenceTrajectory> refs_;
  std::vector<PlannedMotion> plans_;
};

}  // namespace seaplan
