#pragma once

#include "seaplan/geometry.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace seaplan {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Discrete-time optimal control problem in multiple-shooting form:
///   min  sum_{k<H} l_k(x_k, u_k) + l_H(x_H)
///   s.t. x_0 = x_init, x_{k+1} = F_k(x_k, u_k), g_k(x_k, u_k) >= 0.
/// Knot k < H owns the block [x_k; u_k]; knot H owns x_H. Cost Hessians are
/// Gauss-Newton approximations and must be positive semidefinite.
class ShootingProblem {
public:
  virtual ~ShootingProblem() = default;

  virtual int nx() const = 0;
  virtual int nu() const = 0;
  virtual int horizon() const = 0;
  virtual VectorXd initial_state() const = 0;

  virtual void step(int k, const VectorXd& x, const VectorXd& u, VectorXd& next, MatrixXd* A,
                    MatrixXd* B) const = 0;

  /// a - b; override to wrap angular components.
  virtual VectorXd state_difference(const VectorXd& a, const VectorXd& b) const { return a - b; }

  /// Cost of knot k (u is empty at k == H); gradient and Hessian over the
  /// knot block when requested.
  virtual double cost(int k, const VectorXd& x, const VectorXd& u, VectorXd* grad,
                      MatrixXd* hess) const = 0;

  virtual int num_constraints(int k) const = 0;
  /// g_k(x_k, u_k) >= 0 and its Jacobian over the knot block.
  virtual void constraints(int k, const VectorXd& x, const VectorXd& u, VectorXd& g,
                           MatrixXd* jac) const = 0;
};

enum class SolveStatus { Converged, MaxIterations, Infeasible, NumericError };

std::string to_string(SolveStatus s);

struct SolverOptions {
  double kkt_tol = 1e-4;       // scaled stationarity
  double defect_tol = 1e-5;    // max |defect|
  double feas_tol = 1e-7;      // max inequality violation
  int max_iterations = 150;    // Newton iterations over all outer loops
  double rho_init = 10.0;
  double rho_max = 1e9;
  bool keep_log = false;
};

/// Primal trajectories plus optional inequality multipliers for warm starts.
struct ShootingIterate {
  std::vector<VectorXd> x;  // H + 1
  std::vector<VectorXd> u;  // H
  std::vector<VectorXd> ineq_duals;  // per knot, empty for a cold start
  double rho = 0.0;                  // 0 selects rho_init
};

struct ShootingResult {
  ShootingIterate iterate;
  SolveStatus status = SolveStatus::NumericError;
  int iterations = 0;
  double objective = 0.0;
  double kkt_residual = 0.0;
  double max_defect = 0.0;
  double max_violation = 0.0;
  std::vector<std::string> log;
};

ShootingResult solve_shooting(const ShootingProblem& prob, ShootingIterate guess,
                              const SolverOptions& opt);

/// Flat view of a shooting problem, z = [x_0, u_0, ..., x_{H-1}, u_{H-1}, x_H].
/// Dense derivatives; intended for audits and finite-difference checks.
class Transcription {
public:
  explicit Transcription(const ShootingProblem& prob);

  int num_variables() const;
  int num_defects() const;        // nx * H dynamics defects
  int num_initial() const;        // nx initial-condition rows
  int num_inequalities() const;
  int block_size(int k) const;    // nx + nu, or nx at k == H

  VectorXd pack(const std::vector<VectorXd>& x, const std::vector<VectorXd>& u) const;
  void unpack(const VectorXd& z, std::vector<VectorXd>& x, std::vector<VectorXd>& u) const;

  double objective(const VectorXd& z) const;
  VectorXd gradient(const VectorXd& z) const;
  /// Initial-condition rows followed by dynamics defects.
  VectorXd equalities(const VectorXd& z) const;
  MatrixXd equality_jacobian(const VectorXd& z) const;
  VectorXd inequalities(const VectorXd& z) const;
  MatrixXd inequality_jacobian(const VectorXd& z) const;

private:
  const ShootingProblem& prob_;
  std::vector<int> offset_;
};

}  // namespace seaplan
