#include "seaplan/shooting_solver.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace seaplan {

namespace {

struct Evaluation {
  double f = 0.0;   // objective
  double al = 0.0;  // augmented-Lagrangian penalty
  double defect_inf = 0.0;
  double defect_l1 = 0.0;
  double violation = 0.0;       // max(-g)
  double complementarity = 0.0; // max g over constraints with positive multiplier
  bool finite = true;
  std::vector<VectorXd> grad;   // of f + al, per block
  std::vector<MatrixXd> hess;
  std::vector<VectorXd> defect; // [0] initial condition, [k+1] dynamics
  std::vector<MatrixXd> A;
  std::vector<MatrixXd> B;
  std::vector<VectorXd> mu;     // max(0, lambda - rho g)
};

Evaluation evaluate(const ShootingProblem& p, const ShootingIterate& it, double rho, bool derivs) {
  const int H = p.horizon();
  const int nx = p.nx();
  const int nu = p.nu();
  Evaluation ev;
  ev.defect.resize(H + 1);
  ev.mu.resize(H + 1);
  if (derivs) {
    ev.grad.resize(H + 1);
    ev.hess.resize(H + 1);
    ev.A.resize(H);
    ev.B.resize(H);
  }
  const VectorXd empty;
  VectorXd g;
  MatrixXd gj;
  VectorXd next;
  for (int k = 0; k <= H; ++k) {
    const VectorXd& u = k < H ? it.u[k] : empty;
    const int nb = k < H ? nx + nu : nx;
    VectorXd grad;
    MatrixXd hess;
    ev.f += p.cost(k, it.x[k], u, derivs ? &grad : nullptr, derivs ? &hess : nullptr);
    const int m = p.num_constraints(k);
    ev.mu[k] = VectorXd::Zero(m);
    if (m > 0) {
      p.constraints(k, it.x[k], u, g, derivs ? &gj : nullptr);
      const VectorXd& lam = it.ineq_duals[k];
      for (int i = 0; i < m; ++i) {
        const double mu = lam(i) - rho * g(i);
        ev.violation = std::max(ev.violation, -g(i));
        if (mu > 0.0) {
          ev.al += (mu * mu - lam(i) * lam(i)) / (2.0 * rho);
          ev.mu[k](i) = mu;
          ev.complementarity = std::max(ev.complementarity, std::abs(g(i)));
          if (derivs) {
            grad.noalias() -= mu * gj.row(i).transpose();
            hess.noalias() += rho * gj.row(i).transpose() * gj.row(i);
          }
        } else {
          ev.al -= lam(i) * lam(i) / (2.0 * rho);
        }
      }
    }
    if (derivs) {
      if (grad.size() != nb || hess.rows() != nb) throw DimensionMismatch("cost derivative size");
      ev.grad[k] = std::move(grad);
      ev.hess[k] = std::move(hess);
    }
    if (k < H) {
      if (derivs) {
        p.step(k, it.x[k], it.u[k], next, &ev.A[k], &ev.B[k]);
      } else {
        p.step(k, it.x[k], it.u[k], next, nullptr, nullptr);
      }
      ev.defect[k + 1] = p.state_difference(it.x[k + 1], next);
    }
  }
  ev.defect[0] = p.state_difference(it.x[0], p.initial_state());
  for (const auto& c : ev.defect) {
    ev.defect_inf = std::max(ev.defect_inf, c.cwiseAbs().maxCoeff());
    ev.defect_l1 += c.cwiseAbs().sum();
  }
  ev.finite = std::isfinite(ev.f) && std::isfinite(ev.al) && std::isfinite(ev.defect_l1);
  return ev;
}

// Block-tridiagonal factorization of S = J W J^T, W = blockdiag(H_k)^-1.
struct Factorization {
  int H = 0;
  int nx = 0;
  int nu = 0;
  std::vector<MatrixXd> W;
  std::vector<MatrixXd> C;  // -[A_k B_k]
  std::vector<Eigen::LLT<MatrixXd>> L;
  std::vector<MatrixXd> M;  // S_{r,r-1} L_{r-1}^{-T}
  bool ok = true;
};

Factorization factorize(const Evaluation& ev, int H, int nx, int nu, double reg) {
  Factorization f;
  f.H = H;
  f.nx = nx;
  f.nu = nu;
  f.W.resize(H + 1);
  f.C.resize(H);
  for (int k = 0; k <= H; ++k) {
    const MatrixXd& h = ev.hess[k];
    const double scale = std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
    MatrixXd hr = h + reg * scale * MatrixXd::Identity(h.rows(), h.cols());
    Eigen::LLT<MatrixXd> llt(hr);
    if (llt.info() != Eigen::Success) {
      f.ok = false;
      return f;
    }
    f.W[k] = llt.solve(MatrixXd::Identity(h.rows(), h.cols()));
  }
  for (int k = 0; k < H; ++k) {
    f.C[k].resize(nx, nx + nu);
    f.C[k] << -ev.A[k], -ev.B[k];
  }
  f.L.resize(H + 1);
  f.M.resize(H + 1);
  f.L[0].compute(f.W[0].topLeftCorner(nx, nx));
  if (f.L[0].info() != Eigen::Success) {
    f.ok = false;
    return f;
  }
  for (int k = 0; k < H; ++k) {
    const MatrixXd CW = f.C[k] * f.W[k];
    const MatrixXd Sd = CW * f.C[k].transpose() + f.W[k + 1].topLeftCorner(nx, nx);
    const MatrixXd Sl = CW.leftCols(nx);
    // M = Sl L^{-T}  <=>  M^T = L^{-1} Sl^T
    f.M[k + 1] = f.L[k].matrixL().solve(Sl.transpose()).transpose();
    f.L[k + 1].compute(Sd - f.M[k + 1] * f.M[k + 1].transpose());
    if (f.L[k + 1].info() != Eigen::Success) {
      f.ok = false;
      return f;
    }
  }
  return f;
}

struct Step {
  std::vector<VectorXd> d;       // per block
  std::vector<VectorXd> lambda;  // per defect block
  std::vector<VectorXd> residual;  // g + J^T lambda
};

// Solves H d + J^T lambda = -g, J d = -c.
Step solve_kkt(const Factorization& f, const std::vector<VectorXd>& g, const std::vector<VectorXd>& c) {
  const int H = f.H;
  const int nx = f.nx;
  std::vector<VectorXd> Wg(H + 1);
  for (int k = 0; k <= H; ++k) Wg[k] = f.W[k] * g[k];
  std::vector<VectorXd> y(H + 1);
  VectorXd rhs = c[0] - Wg[0].head(nx);
  y[0] = f.L[0].matrixL().solve(rhs);
  for (int k = 0; k < H; ++k) {
    rhs = c[k + 1] - (f.C[k] * Wg[k] + Wg[k + 1].head(nx));
    y[k + 1] = f.L[k + 1].matrixL().solve(rhs - f.M[k + 1] * y[k]);
  }
  Step s;
  s.lambda.resize(H + 1);
  s.lambda[H] = f.L[H].matrixU().solve(y[H]);
  for (int k = H - 1; k >= 0; --k) {
    s.lambda[k] = f.L[k].matrixU().solve(y[k] - f.M[k + 1].transpose() * s.lambda[k + 1]);
  }
  s.d.resize(H + 1);
  s.residual.resize(H + 1);
  for (int k = 0; k <= H; ++k) {
    VectorXd jt = VectorXd::Zero(g[k].size());
    jt.head(nx) = s.lambda[k];
    if (k < H) jt.noalias() += f.C[k].transpose() * s.lambda[k + 1];
    s.residual[k] = g[k] + jt;
    s.d[k] = -f.W[k] * s.residual[k];
  }
  return s;
}

ShootingIterate advance(const ShootingIterate& it, const std::vector<VectorXd>& d, double alpha,
                        int nx) {
  ShootingIterate out = it;
  const int H = static_cast<int>(it.u.size());
  for (int k = 0; k <= H; ++k) {
    out.x[k] += alpha * d[k].head(nx);
    if (k < H) out.u[k] += alpha * d[k].tail(d[k].size() - nx);
  }
  return out;
}

double merit(const Evaluation& ev, double nu) { return ev.f + ev.al + nu * ev.defect_l1; }

double inf_norm(const std::vector<VectorXd>& v) {
  double m = 0.0;
  for (const auto& x : v) {
    if (x.size() > 0) m = std::max(m, x.cwiseAbs().maxCoeff());
  }
  return m;
}

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::NumericError: return "numeric_error";
  }
  return "?";
}

ShootingResult solve_shooting(const ShootingProblem& prob, ShootingIterate it, const SolverOptions& opt) {
  const int H = prob.horizon();
  const int nx = prob.nx();
  const int nu = prob.nu();
  if (static_cast<int>(it.x.size()) != H + 1 || static_cast<int>(it.u.size()) != H) {
    throw DimensionMismatch("initial guess does not match the horizon");
  }
  for (int k = 0; k <= H; ++k) {
    if (it.x[k].size() != nx) throw DimensionMismatch("state guess size");
    if (k < H && it.u[k].size() != nu) throw DimensionMismatch("input guess size");
  }
  if (static_cast<int>(it.ineq_duals.size()) != H + 1) it.ineq_duals.assign(H + 1, VectorXd());
  for (int k = 0; k <= H; ++k) {
    const int m = prob.num_constraints(k);
    if (it.ineq_duals[k].size() != m) it.ineq_duals[k] = VectorXd::Zero(m);
  }
  double rho = it.rho > 0.0 ? it.rho : opt.rho_init;
  it.x[0] = prob.initial_state();

  ShootingResult res;
  int iter = 0;
  auto note = [&](const char* fmt, auto... args) {
    if (!opt.keep_log) return;
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, args...);
    res.log.emplace_back(buf);
  };
  auto finish = [&](SolveStatus st, const Evaluation& ev, double kkt) {
    res.status = st;
    res.iterations = iter;
    res.objective = ev.f;
    res.kkt_residual = kkt;
    res.max_defect = ev.defect_inf;
    res.max_violation = ev.violation;
    it.rho = rho;
    res.iterate = it;
    return res;
  };

  double nu_merit = 1.0;
  double prev_violation = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < 40; ++outer) {
    Evaluation ev;
    double kkt = std::numeric_limits<double>::infinity();
    while (true) {
      ev = evaluate(prob, it, rho, true);
      if (!ev.finite) return finish(SolveStatus::NumericError, ev, kkt);
      Factorization fac;
      for (double reg : {1e-10, 1e-7, 1e-4}) {
        fac = factorize(ev, H, nx, nu, reg);
        if (fac.ok) break;
      }
      if (!fac.ok) return finish(SolveStatus::NumericError, ev, kkt);
      const Step step = solve_kkt(fac, ev.grad, ev.defect);
      kkt = inf_norm(step.residual) / std::max(1.0, inf_norm(ev.grad));
      note("it=%d outer=%d f=%.6e al=%.3e kkt=%.3e defect=%.3e viol=%.3e rho=%.1e", iter, outer, ev.f,
           ev.al, kkt, ev.defect_inf, ev.violation, rho);
      if (kkt <= opt.kkt_tol && ev.defect_inf <= opt.defect_tol) break;
      if (iter >= opt.max_iterations) return finish(SolveStatus::MaxIterations, ev, kkt);

      nu_merit = std::max(nu_merit, 1.5 * inf_norm(step.lambda) + 1e-3);
      double slope = -nu_merit * ev.defect_l1;
      for (int k = 0; k <= H; ++k) slope += ev.grad[k].dot(step.d[k]);
      const double m0 = merit(ev, nu_merit);
      double alpha = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 40; ++ls) {
        ShootingIterate trial = advance(it, step.d, alpha, nx);
        Evaluation tev = evaluate(prob, trial, rho, false);
        if (tev.finite && merit(tev, nu_merit) <= m0 + 1e-4 * alpha * std::min(slope, 0.0)) {
          it = std::move(trial);
          accepted = true;
          break;
        }
        if (ls == 0 && tev.finite) {
          // second-order correction against the defect curvature
          const std::vector<VectorXd> zero_g = [&] {
            std::vector<VectorXd> z(H + 1);
            for (int k = 0; k <= H; ++k) z[k] = VectorXd::Zero(ev.grad[k].size());
            return z;
          }();
          const Step corr = solve_kkt(fac, zero_g, tev.defect);
          ShootingIterate soc = advance(trial, corr.d, 1.0, nx);
          Evaluation sev = evaluate(prob, soc, rho, false);
          if (sev.finite && merit(sev, nu_merit) <= m0 + 1e-4 * std::min(slope, 0.0)) {
            it = std::move(soc);
            accepted = true;
            break;
          }
        }
        alpha *= 0.5;
      }
      ++iter;
      if (!accepted) {
        if (ev.defect_inf <= opt.defect_tol && kkt <= 10.0 * opt.kkt_tol) break;
        return finish(SolveStatus::NumericError, ev, kkt);
      }
    }

    // multiplier update
    if (ev.violation <= opt.feas_tol && ev.complementarity <= 1e-4) {
      it.ineq_duals = ev.mu;
      return finish(SolveStatus::Converged, ev, kkt);
    }
    it.ineq_duals = ev.mu;
    if (ev.violation > 0.25 * prev_violation) {
      if (rho >= opt.rho_max) {
        return finish(SolveStatus::Infeasible, ev, kkt);
      }
      rho = std::min(rho * 10.0, opt.rho_max);
    }
    prev_violation = ev.violation;
  }
  const Evaluation ev = evaluate(prob, it, rho, false);
  return finish(SolveStatus::Infeasible, ev, std::numeric_limits<double>::infinity());
}

Transcription::Transcription(const ShootingProblem& prob) : prob_(prob) {
  const int H = prob.horizon();
  offset_.resize(H + 2);
  offset_[0] = 0;
  for (int k = 0; k <= H; ++k) offset_[k + 1] = offset_[k] + block_size(k);
}

int Transcription::block_size(int k) const {
  return k < prob_.horizon() ? prob_.nx() + prob_.nu() : prob_.nx();
}

int Transcription::num_variables() const { return offset_.back(); }
int Transcription::num_defects() const { return prob_.nx() * prob_.horizon(); }
int Transcription::num_initial() const { return prob_.nx(); }

int Transcription::num_inequalities() const {
  int m = 0;
  for (int k = 0; k <= prob_.horizon(); ++k) m += prob_.num_constraints(k);
  return m;
}

VectorXd Transcription::pack(const std::vector<VectorXd>& x, const std::vector<VectorXd>& u) const {
  const int H = prob_.horizon();
  const int nx = prob_.nx();
  VectorXd z(num_variables());
  for (int k = 0; k <= H; ++k) {
    z.segment(offset_[k], nx) = x[k];
    if (k < H) z.segment(offset_[k] + nx, prob_.nu()) = u[k];
  }
  return z;
}

void Transcription::unpack(const VectorXd& z, std::vector<VectorXd>& x, std::vector<VectorXd>& u) const {
  if (z.size() != num_variables()) throw DimensionMismatch("decision vector size");
  const int H = prob_.horizon();
  const int nx = prob_.nx();
  x.assign(H + 1, VectorXd());
  u.assign(H, VectorXd());
  for (int k = 0; k <= H; ++k) {
    x[k] = z.segment(offset_[k], nx);
    if (k < H) u[k] = z.segment(offset_[k] + nx, prob_.nu());
  }
}

double Transcription::objective(const VectorXd& z) const {
  std::vector<VectorXd> x, u;
  unpack(z, x, u);
  double f = 0.0;
  const VectorXd empty;
  for (int k = 0; k <= prob_.horizon(); ++k) {
    f += prob_.cost(k, x[k], k < prob_.horizon() ? u[k] : empty, nullptr, nullptr);
  }
  return f;
}

VectorXd Transcription::gradient(const VectorXd& z) const {
  std::vector<VectorXd> x, u;
  unpack(z, x, u);
  VectorXd g(num_variables());
  const VectorXd empty;
  for (int k = 0; k <= prob_.horizon(); ++k) {
    VectorXd gk;
    MatrixXd hk;
    prob_.cost(k, x[k], k < prob_.horizon() ? u[k] : empty, &gk, &hk);
    g.segment(offset_[k], block_size(k)) = gk;
  }
  return g;
}

VectorXd Transcription::equalities(const VectorXd& z) const {
  std::vector<VectorXd> x, u;
  unpack(z, x, u);
  const int nx = prob_.nx();
  VectorXd c(num_initial() + num_defects());
  c.head(nx) = prob_.state_difference(x[0], prob_.initial_state());
  VectorXd next;
  for (int k = 0; k < prob_.horizon(); ++k) {
    prob_.step(k, x[k], u[k], next, nullptr, nullptr);
    c.segment(nx * (k + 1), nx) = prob_.state_difference(x[k + 1], next);
  }
  return c;
}

MatrixXd Transcription::equality_jacobian(const VectorXd& z) const {
  std::vector<VectorXd> x, u;
  unpack(z, x, u);
  const int nx = prob_.nx();
  const int nu = prob_.nu();
  MatrixXd J = MatrixXd::Zero(num_initial() + num_defects(), num_variables());
  J.block(0, 0, nx, nx).setIdentity();
  VectorXd next;
  MatrixXd A, B;
  for (int k = 0; k < prob_.horizon(); ++k) {
    prob_.step(k, x[k], u[k], next, &A, &B);
    const int row = nx * (k + 1);
    J.block(row, offset_[k], nx, nx) = -A;
    J.block(row, offset_[k] + nx, nx, nu) = -B;
    J.block(row, offset_[k + 1], nx, nx).setIdentity();
  }
  return J;
}

VectorXd Transcription::inequalities(const VectorXd& z) const {
  std::vector<VectorXd> x, u;
  unpack(z, x, u);
  VectorXd out(num_inequalities());
  int row = 0;
  const VectorXd empty;
  VectorXd g;
  for (int k = 0; k <= prob_.horizon(); ++k) {
    const int m = prob_.num_constraints(k);
    if (m == 0) continue;
    prob_.constraints(k, x[k], k < prob_.horizon() ? u[k] : empty, g, nullptr);
    out.segment(row, m) = g;
    row += m;
  }
  return out;
}

MatrixXd Transcription::inequality_jacobian(const VectorXd& z) const {
  std::vector<VectorXd> x, u;
  unpack(z, x, u);
  MatrixXd J = MatrixXd::Zero(num_inequalities(), num_variables());
  int row = 0;
  const VectorXd empty;
  VectorXd g;
  MatrixXd gj;
  for (int k = 0; k <= prob_.horizon(); ++k) {
    const int m = prob_.num_constraints(k);
    if (m == 0) continue;
    prob_.constraints(k, x[k], k < prob_.horizon() ? u[k] : empty, g, &gj);
    J.block(row, offset_[k], m, block_size(k)) = gj;
    row += m;
  }
  return J;
}

}  // namespace seaplan
