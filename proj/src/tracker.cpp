#include "seaplan/tracker.hpp"

#include <unsupported/Eigen/AutoDiff>

#include <algorithm>
#include <cmath>

namespace seaplan {

namespace {

ShootingIterate cold_guess(const TrackingProblem& p) {
  ShootingIterate it;
  const int H = p.horizon();
  it.x.resize(H + 1);
  it.u.resize(H);
  // zero-rate rollout: dynamically consistent and inside every box
  it.x[0] = p.initial_state();
  for (int k = 0; k < H; ++k) {
    it.u[k] = Eigen::Vector2d::Zero();
    p.step(k, it.x[k], it.u[k], it.x[k + 1], nullptr, nullptr);
  }
  return it;
}

ShootingIterate shifted_guess(const TrackingProblem& p, const ShootingIterate& prev, int shift) {
  ShootingIterate it;
  const int H = p.horizon();
  it.x.resize(H + 1);
  it.u.resize(H);
  it.ineq_duals.resize(H + 1);
  const int n_prev = static_cast<int>(prev.u.size());
  for (int k = 0; k <= H; ++k) {
    const int src = std::min(k + shift, n_prev);
    it.x[k] = prev.x[src];
    if (k < H) it.u[k] = prev.u[std::min(k + shift, n_prev - 1)];
    const int dsrc = std::min(k + shift, n_prev);
    if (dsrc < static_cast<int>(prev.ineq_duals.size()) &&
        prev.ineq_duals[dsrc].size() == p.num_constraints(k)) {
      it.ineq_duals[k] = prev.ineq_duals[dsrc];
    } else {
      it.ineq_duals[k] = VectorXd::Zero(p.num_constraints(k));
    }
  }
  it.rho = prev.rho;
  it.x[0] = p.initial_state();
  for (int k = 1; k <= H; ++k) it.x[k](2) = it.x[k - 1](2) + wrap_angle(it.x[k](2) - it.x[k - 1](2));
  return it;
}

Wrench clamp_to_limits(Wrench w, const VesselParams& p) {
  w.X = std::clamp(w.X, -p.X_lim, p.X_lim);
  w.N = std::clamp(w.N, -p.N_lim, p.N_lim);
  return w;
}

}  // namespace

int TrackerConfig::steps() const { return static_cast<int>(std::llround(horizon / dt)); }

void TrackerConfig::validate() const {
  if (!(dt > 0.0)) throw ValidationError("tracker.dt must be positive");
  if (!(horizon > 0.0) || std::abs(horizon / dt - steps()) > 1e-9) {
    throw ValidationError("tracker.horizon must be a positive multiple of tracker.dt");
  }
  for (int i = 0; i < 6; ++i) {
    if (!(Q[i] >= 0.0)) throw ValidationError("tracker.Q[" + std::to_string(i) + "] must be >= 0");
    if (!(P[i] >= 0.0)) throw ValidationError("tracker.P[" + std::to_string(i) + "] must be >= 0");
  }
  for (int i = 0; i < 2; ++i) {
    if (!(R[i] > 0.0)) throw ValidationError("tracker.R[" + std::to_string(i) + "] must be > 0");
  }
}

TrackingProblem::TrackingProblem(const State6& plant, const Wrench& applied, const PlannedMotion& motion,
                                 double t_now, const TrackerConfig& cfg, const VesselParams& params)
    : cfg_(cfg), params_(params) {
  cfg_.validate();
  H_ = cfg_.steps();
  const Wrench a0 = clamp_to_limits(applied, params_);
  x0_.resize(8);
  x0_ << plant.vec(), a0.X, a0.N;
  ref_.reserve(H_ + 1);
  tau_.reserve(H_ + 1);
  for (int k = 0; k <= H_; ++k) {
    const AugState a = motion.state_at(t_now + k * cfg_.dt);
    ref_.push_back(a.s);
    tau_.push_back(clamp_to_limits(a.wrench(), params_));
  }
}

void TrackingProblem::step(int, const VectorXd& x, const VectorXd& u, VectorXd& next, MatrixXd* A,
                           MatrixXd* B) const {
  if (!A) {
    const Vec8 a = x;
    next = aug_rk4_step<double>(a, u(0), u(1), cfg_.dt, params_);
    return;
  }
  using AD10 = Eigen::AutoDiffScalar<Eigen::Matrix<double, 10, 1>>;
  Eigen::Matrix<AD10, 8, 1> a;
  for (int i = 0; i < 8; ++i) a(i) = AD10(x(i), 10, i);
  const AD10 Xd(u(0), 10, 8);
  const AD10 Nd(u(1), 10, 9);
  const Eigen::Matrix<AD10, 8, 1> out = aug_rk4_step<AD10>(a, Xd, Nd, cfg_.dt, params_);
  next.resize(8);
  A->resize(8, 8);
  B->resize(8, 2);
  for (int i = 0; i < 8; ++i) {
    next(i) = out(i).value();
    A->row(i) = out(i).derivatives().head<8>().transpose();
    B->row(i) = out(i).derivatives().tail<2>().transpose();
  }
}

VectorXd TrackingProblem::state_difference(const VectorXd& a, const VectorXd& b) const {
  VectorXd d = a - b;
  d(2) = wrap_angle(d(2));
  return d;
}

double TrackingProblem::cost(int k, const VectorXd& x, const VectorXd& u, VectorXd* grad,
                             MatrixXd* hess) const {
  Vec6 e = x.head<6>() - ref_[k].vec();
  e(2) = wrap_angle(e(2));
  const bool terminal = k == H_;
  const auto& W = terminal ? cfg_.P : cfg_.Q;
  const double dX = x(6) - tau_[k].X;
  const double dN = x(7) - tau_[k].N;
  double c = cfg_.R[0] * dX * dX + cfg_.R[1] * dN * dN;
  for (int i = 0; i < 6; ++i) c += W[i] * e(i) * e(i);
  const int nb = terminal ? 8 : 10;
  if (grad) {
    grad->setZero(nb);
    hess->setZero(nb, nb);
    for (int i = 0; i < 6; ++i) {
      (*grad)(i) = 2.0 * W[i] * e(i);
      (*hess)(i, i) = 2.0 * W[i];
    }
    (*grad)(6) = 2.0 * cfg_.R[0] * dX;
    (*grad)(7) = 2.0 * cfg_.R[1] * dN;
    (*hess)(6, 6) = 2.0 * cfg_.R[0];
    (*hess)(7, 7) = 2.0 * cfg_.R[1];
  }
  if (terminal) return c;
  c += cfg_.R_rate[0] * u(0) * u(0) + cfg_.R_rate[1] * u(1) * u(1);
  if (grad) {
    (*grad)(8) = 2.0 * cfg_.R_rate[0] * u(0);
    (*grad)(9) = 2.0 * cfg_.R_rate[1] * u(1);
    (*hess)(8, 8) = 2.0 * cfg_.R_rate[0];
    (*hess)(9, 9) = 2.0 * cfg_.R_rate[1];
    *grad *= cfg_.dt;
    *hess *= cfg_.dt;
  }
  return cfg_.dt * c;
}

void TrackingProblem::constraints(int k, const VectorXd& x, const VectorXd& u, VectorXd& g,
                                  MatrixXd* jac) const {
  const int m = num_constraints(k);
  g.resize(m);
  if (jac) jac->setZero(m, k < H_ ? 10 : 8);
  int row = 0;
  auto box = [&](double value, double lim, int col) {
    g(row) = lim - value;
    if (jac) (*jac)(row, col) = -1.0;
    ++row;
    g(row) = value + lim;
    if (jac) (*jac)(row, col) = 1.0;
    ++row;
  };
  if (k < H_) {
    box(u(0), params_.Xdelta_lim, 8);
    box(u(1), params_.Ndelta_lim, 9);
  }
  if (k > 0) {
    box(x(6), params_.X_lim, 6);
    box(x(7), params_.N_lim, 7);
  }
}

Wrench track(const State6& plant, const PlannedMotion& motion, double t_now, const TrackerConfig& cfg,
             const VesselParams& params) {
  const TrackingProblem prob(plant, motion.state_at(t_now).wrench(), motion, t_now, cfg, params);
  const ShootingResult res = solve_shooting(prob, cold_guess(prob), cfg.solver);
  if (res.status != SolveStatus::Converged) return prob.planned_input(0);
  return clamp_to_limits({res.iterate.x[1](6), res.iterate.x[1](7)}, params);
}

Tracker::Tracker(TrackerConfig cfg, VesselParams params, Wrench initial_command)
    : cfg_(cfg), params_(params), last_(initial_command) {
  cfg_.validate();
}

Wrench Tracker::command(const State6& plant, const PlannedMotion& motion, double t_now, double dt_cmd) {
  const TrackingProblem prob(plant, last_, motion, t_now, cfg_, params_);
  ShootingIterate guess = cold_guess(prob);
  if (cache_) {
    const int shift = static_cast<int>(std::llround((t_now - cache_time_) / cfg_.dt));
    if (shift >= 0 && shift <= prob.horizon()) guess = shifted_guess(prob, *cache_, shift);
  }
  const ShootingResult res = solve_shooting(prob, std::move(guess), cfg_.solver);
  last_iterations_ = res.iterations;
  Wrench w;
  if (res.status == SolveStatus::Converged) {
    last_fallback_ = false;
    w = {res.iterate.x[1](6), res.iterate.x[1](7)};
    cache_ = res.iterate;
    cache_time_ = t_now;
  } else {
    last_fallback_ = true;
    w = prob.planned_input(0);
    cache_.reset();
  }
  const double dX = params_.Xdelta_lim * dt_cmd;
  const double dN = params_.Ndelta_lim * dt_cmd;
  w.X = std::clamp(w.X, last_.X - dX, last_.X + dX);
  w.N = std::clamp(w.N, last_.N - dN, last_.N + dN);
  last_ = clamp_to_limits(w, params_);
  return last_;
}

}  // namespace seaplan
