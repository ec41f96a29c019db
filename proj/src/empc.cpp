#include "seaplan/empc.hpp"

#include <unsupported/Eigen/AutoDiff>

#include <algorithm>
#include <cmath>

namespace seaplan {

namespace {

/// Below this distance the goal hold leaves the heading free.
constexpr double kHoldAimDistance = 0.1;  // m

using AD = Eigen::AutoDiffScalar<Eigen::Matrix<double, 10, 1>>;

double dphi(double F, double eps) { return 1.5 * F * std::pow(F * F + eps, -0.25); }

double ddphi(double F, double eps) {
  return 1.5 * std::pow(F * F + eps, -1.25) * (0.5 * F * F + eps);
}

}  // namespace

int EmpcConfig::horizon() const { return static_cast<int>(std::llround(T_p / dt)); }

void EmpcConfig::validate() const {
  for (int i = 0; i < 6; ++i) {
    if (!(Q[i] >= 0.0)) throw ValidationError("empc.Q[" + std::to_string(i) + "] must be >= 0");
    if (!(P[i] >= 0.0)) throw ValidationError("empc.P[" + std::to_string(i) + "] must be >= 0");
  }
  for (int i = 0; i < 2; ++i) {
    if (!(R_delta[i] > 0.0)) throw ValidationError("empc.R_delta[" + std::to_string(i) + "] must be > 0");
    if (!(R_u[i] >= 0.0)) throw ValidationError("empc.R_u[" + std::to_string(i) + "] must be >= 0");
  }
  if (!(k_ec >= 0.0)) throw ValidationError("empc.k_ec must be >= 0");
  if (!(dt > 0.0)) throw ValidationError("empc.dt must be positive");
  if (!(T_p > 0.0)) throw ValidationError("empc.T_p must be positive");
  if (std::abs(T_p / dt - horizon()) > 1e-9) throw ValidationError("empc.T_p must be a multiple of empc.dt");
  if (!(r_c >= 0.0)) throw ValidationError("empc.r_c must be >= 0");
  if (!(r_v >= 0.0)) throw ValidationError("empc.r_v must be >= 0");
  if (!(r_o_default > 0.0)) throw ValidationError("empc.r_o_default must be positive");
  if (!(smoothing_eps > 0.0)) throw ValidationError("empc.smoothing_eps must be positive");
  if (solver.max_iterations < 0) throw ValidationError("empc.max_iterations must be >= 0");
}

AugState PlannedMotion::state_at(double t) const {
  if (states.empty()) throw ReferenceExpired("empty motion");
  const double s = (t - t_start) / dt;
  if (s <= 0.0) return states.front();
  if (s >= static_cast<double>(states.size() - 1)) return states.back();
  auto i = static_cast<std::size_t>(std::floor(s));
  double w = s - static_cast<double>(i);
  if (w > 1.0 - 1e-9) {
    ++i;
    w = 0.0;
  }
  if (w < 1e-9) return states[i];
  const Vec8 a = states[i].vec();
  Vec8 b = states[i + 1].vec();
  b(2) = a(2) + wrap_angle(b(2) - a(2));
  return AugState::from(a + w * (b - a));
}

ControlRate PlannedMotion::rate_at(double t) const {
  const double s = (t - t_start) / dt + 1e-9;
  if (s < 0.0 || rates.empty()) return rates.empty() ? ControlRate{} : rates.front();
  const auto i = static_cast<std::size_t>(std::floor(s));
  if (i >= rates.size()) return {};
  return rates[i];
}

SolveFailure::SolveFailure(SolveStatus status, PlannedMotion best)
    : Error("planning solver failed: " + to_string(status)), status_(status), best_(std::move(best)) {}

double smoothed_power(double F, double eps) {
  return std::pow(F * F + eps, 0.75) - std::pow(eps, 0.75);
}

double economic_cost(double X, double N, double d, double k_ec, double eps) {
  const ThrustSplit f = thrust_split(X, N, d);
  return k_ec * (smoothed_power(f.left, eps) + smoothed_power(f.right, eps));
}

double tracking_cost(const State6& s, const State6& s_d, const std::array<double, 6>& Q) {
  Vec6 e = s.vec() - s_d.vec();
  e(2) = wrap_angle(e(2));
  double c = 0.0;
  for (int i = 0; i < 6; ++i) c += Q[i] * e(i) * e(i);
  return c;
}

double terminal_cost(const State6& s, const State6& s_d, const std::array<double, 6>& P) {
  return tracking_cost(s, s_d, P);
}

double collision_margin(const Vec2& pos, const Obstacle& ob, double r_c, double r_v) {
  const double R = r_c + r_v + ob.radius;
  return (pos - ob.center).squaredNorm() - R * R;
}

EmpcProblem::EmpcProblem(PlanningProblem prob, EmpcConfig cfg) : prob_(std::move(prob)), cfg_(cfg) {
  cfg_.validate();
  H_ = cfg_.horizon();
  if (H_ < 1) throw DimensionMismatch("horizon must contain at least one step");
  ref_.reserve(H_ + 1);
  free_heading_.reserve(H_ + 1);
  const Vec2 p0 = prob_.a0.s.position();
  for (int k = 0; k <= H_; ++k) {
    const double t = prob_.t_start + k * cfg_.dt;
    State6 r = prob_.reference.at(t);
    bool free = false;
    if (!prob_.reference.params.empty() && prob_.reference.param_at(t).finished) {
      // the goal hold faces the goal from where the plan starts
      const Vec2 to_goal = r.position() - p0;
      if (to_goal.norm() > kHoldAimDistance) {
        r.psi = std::atan2(to_goal.y(), to_goal.x());
      } else {
        free = true;
      }
    }
    ref_.push_back(r);
    free_heading_.push_back(free);
  }
}

VectorXd EmpcProblem::initial_state() const { return prob_.a0.vec(); }

void EmpcProblem::step(int, const VectorXd& x, const VectorXd& u, VectorXd& next, MatrixXd* A,
                       MatrixXd* B) const {
  if (!A) {
    const Vec8 a = x;
    next = aug_rk4_step<double>(a, u(0), u(1), cfg_.dt, prob_.params);
    return;
  }
  Eigen::Matrix<AD, 8, 1> a;
  for (int i = 0; i < 8; ++i) a(i) = AD(x(i), 10, i);
  const AD xd(u(0), 10, 8);
  const AD nd(u(1), 10, 9);
  const Eigen::Matrix<AD, 8, 1> out = aug_rk4_step<AD>(a, xd, nd, cfg_.dt, prob_.params);
  next.resize(8);
  A->resize(8, 8);
  B->resize(8, 2);
  for (int i = 0; i < 8; ++i) {
    next(i) = out(i).value();
    A->row(i) = out(i).derivatives().head<8>().transpose();
    B->row(i) = out(i).derivatives().tail<2>().transpose();
  }
}

VectorXd EmpcProblem::state_difference(const VectorXd& a, const VectorXd& b) const {
  VectorXd d = a - b;
  d(2) = wrap_angle(d(2));
  return d;
}

double EmpcProblem::cost(int k, const VectorXd& x, const VectorXd& u, VectorXd* grad,
                         MatrixXd* hess) const {
  const State6& r = ref_[k];
  Vec6 e = x.head<6>() - r.vec();
  e(2) = wrap_angle(e(2));
  const bool terminal = k == H_;
  auto W = terminal ? cfg_.P : cfg_.Q;
  if (free_heading_[k]) W[2] = 0.0;
  double track = 0.0;
  for (int i = 0; i < 6; ++i) track += W[i] * e(i) * e(i);
  const int nb = terminal ? 8 : 10;
  if (grad) {
    grad->setZero(nb);
    hess->setZero(nb, nb);
    for (int i = 0; i < 6; ++i) {
      (*grad)(i) = 2.0 * W[i] * e(i);
      (*hess)(i, i) = 2.0 * W[i];
    }
  }
  if (terminal) return track;

  const double X = x(6);
  const double N = x(7);
  const double d = prob_.params.d;
  const double eps = cfg_.smoothing_eps;
  const double econ = economic_cost(X, N, d, cfg_.k_ec, eps);
  const double reg = cfg_.R_u[0] * X * X + cfg_.R_u[1] * N * N;
  const double dt = cfg_.dt;
  const double rs = cfg_.rate_increment_weighting ? dt * dt : 1.0;
  const double rd0 = rs * cfg_.R_delta[0];
  const double rd1 = rs * cfg_.R_delta[1];
  const double rates = rd0 * u(0) * u(0) + rd1 * u(1) * u(1);
  if (grad) {
    const ThrustSplit f = thrust_split(X, N, d);
    const double k = cfg_.k_ec;
    const Eigen::Vector2d gl(0.5, 0.5 / d);
    const Eigen::Vector2d gr(0.5, -0.5 / d);
    const Eigen::Vector2d ge = k * (dphi(f.left, eps) * gl + dphi(f.right, eps) * gr);
    const Eigen::Matrix2d he =
        k * (ddphi(f.left, eps) * gl * gl.transpose() + ddphi(f.right, eps) * gr * gr.transpose());
    (*grad)(6) = ge(0) + 2.0 * cfg_.R_u[0] * X;
    (*grad)(7) = ge(1) + 2.0 * cfg_.R_u[1] * N;
    hess->block<2, 2>(6, 6) = he;
    (*hess)(6, 6) += 2.0 * cfg_.R_u[0];
    (*hess)(7, 7) += 2.0 * cfg_.R_u[1];
    (*grad)(8) = 2.0 * rd0 * u(0);
    (*grad)(9) = 2.0 * rd1 * u(1);
    (*hess)(8, 8) = 2.0 * rd0;
    (*hess)(9, 9) = 2.0 * rd1;
    *grad *= dt;
    *hess *= dt;
  }
  return dt * (econ + track + rates + reg);
}

int EmpcProblem::num_constraints(int k) const {
  const int rate_boxes = k < H_ ? 4 : 0;
  const int state_rows = k > 0 ? 4 + static_cast<int>(prob_.obstacles.size()) : 0;
  return rate_boxes + state_rows;
}

void EmpcProblem::constraints(int k, const VectorXd& x, const VectorXd& u, VectorXd& g,
                              MatrixXd* jac) const {
  const int m = num_constraints(k);
  const int nb = k < H_ ? 10 : 8;
  const VesselParams& p = prob_.params;
  g.resize(m);
  if (jac) jac->setZero(m, nb);
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
    box(u(0), p.Xdelta_lim, 8);
    box(u(1), p.Ndelta_lim, 9);
  }
  if (k > 0) {
    box(x(6), p.X_lim, 6);
    box(x(7), p.N_lim, 7);
    for (const auto& ob : prob_.obstacles) {
      const Vec2 pos(x(0), x(1));
      g(row) = collision_margin(pos, ob, cfg_.r_c, cfg_.r_v);
      if (jac) {
        (*jac)(row, 0) = 2.0 * (pos.x() - ob.center.x());
        (*jac)(row, 1) = 2.0 * (pos.y() - ob.center.y());
      }
      ++row;
    }
  }
}

PlannedMotion shift_motion(const PlannedMotion& m, double t_start, int horizon, const VesselParams& p) {
  PlannedMotion out;
  out.t_start = t_start;
  out.dt = m.dt;
  out.states.reserve(horizon + 1);
  out.rates.reserve(horizon);
  const double end = m.end_time();
  for (int k = 0; k <= horizon; ++k) {
    const double t = t_start + k * m.dt;
    if (k == 0 || t <= end + 1e-9) {
      out.states.push_back(m.state_at(t));
    } else {
      out.states.push_back(integrate(out.states.back(), out.rates.back(), m.dt, p));
    }
    if (k < horizon) {
      out.rates.push_back(t + 1e-9 < end ? m.rate_at(t) : ControlRate{});
    }
  }
  out.econ_cost.assign(horizon, 0.0);
  out.tracking_cost.assign(horizon, 0.0);
  const int offset = static_cast<int>(std::llround((t_start - m.t_start) / m.dt));
  if (!m.warm.ineq_duals.empty()) {
    out.warm.rho = m.warm.rho;
    out.warm.ineq_duals.resize(horizon + 1);
    for (int k = 0; k <= horizon; ++k) {
      const int src = k + offset;
      if (src >= 0 && src < static_cast<int>(m.warm.ineq_duals.size())) {
        out.warm.ineq_duals[k] = m.warm.ineq_duals[src];
      }
    }
  }
  return out;
}

ShootingIterate initial_guess(const EmpcProblem& prob, const std::optional<PlannedMotion>& warm_start) {
  const int H = prob.horizon();
  const PlanningProblem& pp = prob.problem();
  ShootingIterate it;
  it.x.resize(H + 1);
  it.u.resize(H);
  if (warm_start) {
    const PlannedMotion m = shift_motion(*warm_start, pp.t_start, H, pp.params);
    for (int k = 0; k <= H; ++k) it.x[k] = m.states[k].vec();
    for (int k = 0; k < H; ++k) it.u[k] = Eigen::Vector2d(m.rates[k].Xdelta, m.rates[k].Ndelta);
    it.ineq_duals.resize(H + 1);
    for (int k = 0; k <= H; ++k) {
      if (k < static_cast<int>(m.warm.ineq_duals.size()) &&
          m.warm.ineq_duals[k].size() == prob.num_constraints(k)) {
        it.ineq_duals[k] = m.warm.ineq_duals[k];
      } else {
        it.ineq_duals[k] = VectorXd::Zero(prob.num_constraints(k));
      }
    }
    it.rho = m.warm.rho;
  } else {
    const VesselParams& p = pp.params;
    for (int k = 0; k <= H; ++k) {
      const State6& r = prob.reference_at(k);
      Vec8 a;
      a.head<6>() = r.vec();
      a(6) = std::clamp(p.D1 * r.u, -p.X_lim, p.X_lim);
      a(7) = std::clamp(p.D3 * r.r, -p.N_lim, p.N_lim);
      it.x[k] = a;
    }
    for (int k = 0; k < H; ++k) it.u[k] = Eigen::Vector2d::Zero();
    // push guess positions sideways out of the obstacles; ties go left
    const double pad = prob.config().r_c + prob.config().r_v + 0.05;
    for (int k = 1; k <= H; ++k) {
      for (const auto& ob : pp.obstacles) {
        const Vec2 d = Vec2(it.x[k](0), it.x[k](1)) - ob.center;
        const double need = ob.radius + pad;
        if (d.norm() >= need) continue;
        const Vec2 t(std::cos(it.x[k](2)), std::sin(it.x[k](2)));
        const Vec2 n(-t.y(), t.x());
        const double along = d.dot(t);
        const double side = d.dot(n) >= 0.0 ? 1.0 : -1.0;
        const Vec2 out = ob.center + along * t + side * std::sqrt(need * need - along * along) * n;
        it.x[k](0) = out.x();
        it.x[k](1) = out.y();
      }
    }
  }
  it.x[0] = pp.a0.vec();
  // keep heading continuous along the guess
  for (int k = 1; k <= H; ++k) it.x[k](2) = it.x[k - 1](2) + wrap_angle(it.x[k](2) - it.x[k - 1](2));
  return it;
}

PlannedMotion plan(const PlanningProblem& prob, const EmpcConfig& cfg,
                   const std::optional<PlannedMotion>& warm_start) {
  const EmpcProblem nlp(prob, cfg);
  const ShootingResult res = solve_shooting(nlp, initial_guess(nlp, warm_start), cfg.solver);
  const int H = nlp.horizon();
  PlannedMotion m;
  m.t_start = prob.t_start;
  m.dt = cfg.dt;
  m.states.reserve(H + 1);
  for (int k = 0; k <= H; ++k) m.states.push_back(AugState::from(res.iterate.x[k]));
  for (int k = 0; k < H; ++k) {
    const VectorXd& u = res.iterate.u[k];
    m.rates.push_back({u(0), u(1)});
    const AugState& a = m.states[k];
    m.econ_cost.push_back(economic_cost(a.X, a.N, prob.params.d, cfg.k_ec, cfg.smoothing_eps));
    m.tracking_cost.push_back(tracking_cost(a.s, nlp.reference_at(k), cfg.Q));
  }
  m.status = res.status;
  m.iterations = res.iterations;
  m.kkt_residual = res.kkt_residual;
  m.max_defect = res.max_defect;
  m.max_violation = res.max_violation;
  m.warm.ineq_duals = res.iterate.ineq_duals;
  m.warm.rho = res.iterate.rho;
  if (res.status != SolveStatus::Converged) throw SolveFailure(res.status, std::move(m));
  return m;
}

double min_collision_margin(const PlannedMotion& m, const std::vector<Obstacle>& obstacles, double r_c,
                            double r_v) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < m.states.size(); ++k) {
    for (const auto& ob : obstacles) {
      best = std::min(best, collision_margin(m.states[k].s.position(), ob, r_c, r_v));
    }
  }
  return best;
}

}  // namespace seaplan
