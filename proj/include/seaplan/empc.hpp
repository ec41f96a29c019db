#pragma once

#include "seaplan/env_graph.hpp"
#include "seaplan/shooting_solver.hpp"
#include "seaplan/trajectory.hpp"
#include "seaplan/vessel.hpp"

#include <array>
#include <optional>
#include <vector>

namespace seaplan {

struct EmpcConfig {
  std::array<double, 6> Q{10.0, 10.0, 20.0, 1.0, 1.0, 1.0};
  std::array<double, 6> P{10.0, 10.0, 20.0, 1.0, 1.0, 1.0};
  std::array<double, 2> R_delta{500.0, 500.0};
  std::array<double, 2> R_u{0.1, 0.1};
  double k_ec = 0.6;
  double T_p = 20.0;  // s
  double dt = 0.2;    // s
  double r_c = 0.0;
  double r_v = 0.77;
  double r_o_default = 0.15;
  double smoothing_eps = 1e-4;  // N^2
  /// R_delta weighs the per-sample increment dt * rate instead of the rate.
  bool rate_increment_weighting = true;
  SolverOptions solver;

  int horizon() const;
  void validate() const;
};

struct PlanningProblem {
  AugState a0;
  double t_start = 0.0;
  ReferenceTrajectory reference;
  std::vector<Obstacle> obstacles;
  VesselParams params;
};

/// Solver bookkeeping carried between plans for warm starts.
struct SolverWarmData {
  std::vector<VectorXd> ineq_duals;
  double rho = 0.0;
};

struct PlannedMotion {
  double t_start = 0.0;
  double dt = 0.2;
  std::vector<AugState> states;     // H + 1
  std::vector<ControlRate> rates;   // H
  std::vector<double> econ_cost;    // per step
  std::vector<double> tracking_cost;
  SolveStatus status = SolveStatus::Converged;
  int iterations = 0;
  double kkt_residual = 0.0;
  double max_defect = 0.0;
  double max_violation = 0.0;
  SolverWarmData warm;

  double end_time() const { return t_start + dt * static_cast<double>(states.size() - 1); }
  /// Linear interpolation between knots (heading wrapped); holds the last
  /// knot past the end and the first before the start.
  AugState state_at(double t) const;
  /// Zero-order hold of the rate; zero past the end.
  ControlRate rate_at(double t) const;
};

/// Thrown by plan() when the solver does not certify a solution.
class SolveFailure : public Error {
public:
  SolveFailure(SolveStatus status, PlannedMotion best);
  SolveStatus status() const { return status_; }
  const PlannedMotion& best() const { return best_; }

private:
  SolveStatus status_;
  PlannedMotion best_;
};

/// (F^2 + eps)^0.75 - eps^0.75.
double smoothed_power(double F, double eps);

double economic_cost(double X, double N, double d, double k_ec, double eps);

double tracking_cost(const State6& s, const State6& s_d, const std::array<double, 6>& Q);
double terminal_cost(const State6& s, const State6& s_d, const std::array<double, 6>& P);

double collision_margin(const Vec2& pos, const Obstacle& ob, double r_c, double r_v);

/// Multiple-shooting form of the planning problem. State x = (x, y, psi, u,
/// v, r, X, N), input u = (Xdelta, Ndelta).
class EmpcProblem : public ShootingProblem {
public:
  EmpcProblem(PlanningProblem prob, EmpcConfig cfg);

  int nx() const override { return 8; }
  int nu() const override { return 2; }
  int horizon() const override { return H_; }
  VectorXd initial_state() const override;
  void step(int k, const VectorXd& x, const VectorXd& u, VectorXd& next, MatrixXd* A,
            MatrixXd* B) const override;
  VectorXd state_difference(const VectorXd& a, const VectorXd& b) const override;
  double cost(int k, const VectorXd& x, const VectorXd& u, VectorXd* grad,
              MatrixXd* hess) const override;
  int num_constraints(int k) const override;
  void constraints(int k, const VectorXd& x, const VectorXd& u, VectorXd& g,
                   MatrixXd* jac) const override;

  const PlanningProblem& problem() const { return prob_; }
  const EmpcConfig& config() const { return cfg_; }
  const State6& reference_at(int k) const { return ref_[k]; }

private:
  PlanningProblem prob_;
  EmpcConfig cfg_;
  int H_ = 0;
  std::vector<State6> ref_;
  std::vector<bool> free_heading_;
};

/// Initial guess: the shifted warm start extended with zero rates, or the
/// reference with steady-state actuator values and zero rates.
ShootingIterate initial_guess(const EmpcProblem& prob, const std::optional<PlannedMotion>& warm_start);

/// Solves the planning problem. Throws SolveFailure.
PlannedMotion plan(const PlanningProblem& prob, const EmpcConfig& cfg,
                   const std::optional<PlannedMotion>& warm_start = std::nullopt);

/// The motion re-timed to start at t_start: samples of the old motion where
/// it is defined, then integrated forward with zero rates.
PlannedMotion shift_motion(const PlannedMotion& m, double t_start, int horizon, const VesselParams& p);

/// Smallest collision margin (m^2) over knots 1..H.
double min_collision_margin(const PlannedMotion& m, const std::vector<Obstacle>& obstacles, double r_c,
                            double r_v);

}  // namespace seaplan
