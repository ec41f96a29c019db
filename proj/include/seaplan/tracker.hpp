#pragma once

#include "seaplan/empc.hpp"
#include "seaplan/shooting_solver.hpp"
#include "seaplan/vessel.hpp"

#include <array>
#include <optional>

namespace seaplan {

struct TrackerConfig {
  double horizon = 5.0;  // s
  double dt = 0.2;       // s
  std::array<double, 6> Q{10.0, 10.0, 0.5, 0.1, 0.1, 0.1};
  std::array<double, 2> R{1e-3, 1e-3};
  std::array<double, 6> P{100.0, 100.0, 5.0, 0.1, 0.1, 0.1};
  /// Rate weight; also keeps the Newton rate block well conditioned.
  std::array<double, 2> R_rate{0.1, 0.1};
  SolverOptions solver{1e-6, 1e-8, 1e-9, 40, 10.0, 1e9, false};

  int steps() const;
  void validate() const;
};

/// Tracking problem over the vessel state extended with the applied (X, N),
/// driven by their rates so the rate limits are constraints rather than an
/// afterthought. The input weight penalizes the departure of (X, N) from the
/// planned actuator values.
class TrackingProblem : public ShootingProblem {
public:
  TrackingProblem(const State6& plant, const Wrench& applied, const PlannedMotion& motion, double t_now,
                  const TrackerConfig& cfg, const VesselParams& params);

  int nx() const override { return 8; }
  int nu() const override { return 2; }
  int horizon() const override { return H_; }
  VectorXd initial_state() const override { return x0_; }
  void step(int k, const VectorXd& x, const VectorXd& u, VectorXd& next, MatrixXd* A,
            MatrixXd* B) const override;
  VectorXd state_difference(const VectorXd& a, const VectorXd& b) const override;
  double cost(int k, const VectorXd& x, const VectorXd& u, VectorXd* grad,
              MatrixXd* hess) const override;
  int num_constraints(int k) const override { return (k < H_ ? 4 : 0) + (k > 0 ? 4 : 0); }
  void constraints(int k, const VectorXd& x, const VectorXd& u, VectorXd& g,
                   MatrixXd* jac) const override;

  const State6& reference_at(int k) const { return ref_[k]; }
  const Wrench& planned_input(int k) const { return tau_[k]; }

private:
  TrackerConfig cfg_;
  VesselParams params_;
  int H_ = 0;
  VectorXd x0_;
  std::vector<State6> ref_;
  std::vector<Wrench> tau_;
};

/// Stateless single solve from the planned (X, N) at t_now; falls back to
/// that wrench.
Wrench track(const State6& plant, const PlannedMotion& motion, double t_now, const TrackerConfig& cfg,
             const VesselParams& params);

/// Tracker with a warm-start cache and rate post-clamping.
class Tracker {
public:
  Tracker(TrackerConfig cfg, VesselParams params, Wrench initial_command = {});

  /// Command for [t_now, t_now + dt_cmd); the change from the previous
  /// command is clamped to the rate limits times dt_cmd.
  Wrench command(const State6& plant, const PlannedMotion& motion, double t_now, double dt_cmd);

  bool last_fallback() const { return last_fallback_; }
  int last_iterations() const { return last_iterations_; }
  const Wrench& last_command() const { return last_; }

private:
  TrackerConfig cfg_;
  VesselParams params_;
  Wrench last_;
  std::optional<ShootingIterate> cache_;
  double cache_time_ = 0.0;
  bool last_fallback_ = false;
  int last_iterations_ = 0;
};

}  // namespace seaplan
