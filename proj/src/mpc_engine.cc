#include "hmpc/mpc_engine.h"

#include <algorithm>
#include <cmath>

#include "hmpc/errors.h"

namespace hmpc {
namespace {

Matrix weight_or_identity(const Matrix& w, Eigen::Index n) {
  return w.size() == 0 ? Matrix::Identity(n, n) : w;
}

// Factor of M with M = L L'; the ellipsoid x'Mx <= c is ||L' x|| <= sqrt(c).
Matrix ellipsoid_factor(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw DegenerateGeometryError("terminal storage matrix is not positive definite");
  }
  return llt.matrixL().transpose();
}

struct Prediction {
  Vector offset;  // (N+1) n
  Matrix gamma;   // (N+1) n x N m
};

Prediction condense(const Matrix& a, const Matrix& b, const Vector& x0,
                    const std::vector<Vector>& e) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  const int horizon = static_cast<int>(e.size());
  Prediction p;
  p.offset.resize((horizon + 1) * n);
  p.gamma = Matrix::Zero((horizon + 1) * n, horizon * m);
  p.offset.head(n) = x0;
  for (int i = 0; i < horizon; ++i) {
    p.offset.segment((i + 1) * n, n) = a * p.offset.segment(i * n, n) + e[i];
    p.gamma.middleRows((i + 1) * n, n) = a * p.gamma.middleRows(i * n, n);
    p.gamma.block((i + 1) * n, i * m, n, m) += b;
  }
  return p;
}

MpcProblem assemble(const Matrix& a, const Matrix& b, const Vector& x0, std::vector<Vector> e,
                    int k, const StageWeights& weights, Prediction& pred) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  const int horizon = static_cast<int>(e.size());
  const Matrix wx = weight_or_identity(weights.state, n);
  const Matrix wu = weight_or_identity(weights.input, m);
  if (wx.rows() != n || wu.rows() != m) throw StructuralError("weights", "size mismatch");

  pred = condense(a, b, x0, e);
  MpcProblem p;
  p.a = a;
  p.b = b;
  p.x0 = x0;
  p.exogenous = std::move(e);
  p.stamp = k;
  p.qp.hessian = Matrix::Zero(horizon * m, horizon * m);
  p.qp.linear = Vector::Zero(horizon * m);
  for (int i = 0; i < horizon; ++i) {
    const Matrix g = pred.gamma.middleRows(i * n, n);
    const Vector f = pred.offset.segment(i * n, n);
    p.qp.hessian += 2.0 * g.transpose() * wx * g;
    p.qp.linear += 2.0 * g.transpose() * wx * f;
    p.qp.constant += f.dot(wx * f);
    p.qp.hessian.block(i * m, i * m, m, m) += 2.0 * wu;
  }
  p.qp.hessian = symmetrize(p.qp.hessian);
  return p;
}

void add_ellipsoid(MpcProblem& p, const Prediction& pred, const ContractiveSet& set, int index,
                   double scale, const std::string& name) {
  const Eigen::Index n = p.a.rows();
  const Matrix lt = ellipsoid_factor(set.m);
  p.qp.balls.push_back({name, lt * pred.gamma.middleRows(index * n, n),
                        lt * pred.offset.segment(index * n, n), scale * std::sqrt(set.level)});
}

void add_rate_balls(MpcProblem& p, const TrajectoryPlan& prev, double radius) {
  const Eigen::Index m = p.b.cols();
  const int horizon = p.horizon();
  if (prev.horizon() != horizon) throw ProtocolError("previous plan has the wrong horizon");
  p.rate_constrained = true;
  p.rate_radius = radius;
  for (int i = 0; i + 1 < horizon; ++i) {
    Matrix w = Matrix::Zero(m, horizon * m);
    w.middleCols(i * m, m).setIdentity();
    p.qp.balls.push_back({"rate[" + std::to_string(i) + "]", w, -prev.inputs[i + 1], radius});
  }
}

std::vector<Vector> unstack(const Vector& z, Eigen::Index m) {
  std::vector<Vector> out;
  for (Eigen::Index i = 0; i < z.size() / m; ++i) out.push_back(z.segment(i * m, m));
  return out;
}

}  // namespace

TrajectoryPlan MpcProblem::expand(const Vector& z) const {
  TrajectoryPlan plan;
  plan.stamp = stamp;
  plan.inputs = unstack(z, b.cols());
  plan.states.push_back(x0);
  for (int i = 0; i < horizon(); ++i) {
    plan.states.push_back(a * plan.states.back() + b * plan.inputs[i] + exogenous[i]);
  }
  return plan;
}

Vector stack_inputs(const std::vector<Vector>& inputs) {
  if (inputs.empty()) return Vector();
  const Eigen::Index m = inputs.front().size();
  Vector z(static_cast<Eigen::Index>(inputs.size()) * m);
  for (std::size_t i = 0; i < inputs.size(); ++i) z.segment(i * m, m) = inputs[i];
  return z;
}

MpcProblem build_outer_problem(const AugmentedOuterModel& aug, const SetPairCertificate& sets,
                               const RateBudget& budget, int k, const Vector& x1aug_k,
                               const std::vector<Vector>& vtilde_traj,
                               const TrajectoryPlan* vdes_prev, const StageWeights& weights) {
  const int horizon = budget.horizon;
  if (static_cast<int>(vtilde_traj.size()) != horizon) {
    throw ProtocolError("outer problem needs an N-step v~ trajectory");
  }
  if (k >= 1 && (vdes_prev == nullptr || vdes_prev->empty())) {
    throw ProtocolError("outer problem at k >= 1 needs the previous v_des plan");
  }
  std::vector<Vector> e;
  for (const auto& v : vtilde_traj) e.push_back(aug.b1aug * v);
  Prediction pred;
  MpcProblem p = assemble(aug.a1aug, aug.bfaug, x1aug_k, std::move(e), k, weights, pred);
  add_ellipsoid(p, pred, sets.g1, horizon - 1, 1.0, "terminal_G1");
  add_ellipsoid(p, pred, sets.g1, horizon, sets.g1.lambda, "terminal_lambda1_G1");
  if (k >= 1) {
    add_rate_balls(p, *vdes_prev,
                   rate_radius(budget.delta_vdes_max, budget.beta, k, budget.n1_star));
  }
  return p;
}

MpcProblem build_inner_problem(const CascadeModel& m, const SetPairCertificate& sets,
                               const RateBudget& budget, int k, const Vector& xtilde_k,
                               const std::vector<Vector>& xf_traj,
                               const std::vector<Vector>& vdes_traj, const TrajectoryPlan* u_prev,
                               const StageWeights& weights) {
  const int horizon = budget.horizon;
  if (static_cast<int>(xf_traj.size()) < horizon ||
      static_cast<int>(vdes_traj.size()) < horizon) {
    throw ProtocolError("inner problem needs the outer xf and v_des predictions");
  }
  if (k >= 1 && (u_prev == nullptr || u_prev->empty())) {
    throw ProtocolError("inner problem at k >= 1 needs the previous u plan");
  }
  const Matrix shift = m.a2() - m.af();
  std::vector<Vector> e;
  for (int i = 0; i < horizon; ++i) e.push_back(shift * xf_traj[i] - m.bf() * vdes_traj[i]);
  Prediction pred;
  MpcProblem p = assemble(m.a2(), m.b2(), xtilde_k, std::move(e), k, weights, pred);
  add_ellipsoid(p, pred, sets.g2, horizon, sets.g2.lambda, "terminal_lambda2_G2");
  if (k >= 1) {
    add_rate_balls(p, *u_prev, rate_radius(budget.delta_u_max, budget.beta, k, budget.n2_star));
  }
  const int pdim = m.p();
  BoxConstraint box;
  box.name = "input_box";
  box.s = Matrix::Identity(horizon * pdim, horizon * pdim);
  box.offset = Vector::Zero(horizon * pdim);
  box.lower = m.input_box().lower.replicate(horizon, 1);
  box.upper = m.input_box().upper.replicate(horizon, 1);
  p.qp.boxes.push_back(std::move(box));
  return p;
}

MpcResult solve_mpc(const MpcProblem& p, const Vector& warm_start, const SolverOptions& opts) {
  MpcResult r;
  r.solution = solve(p.qp, warm_start, opts);
  r.plan = p.expand(r.solution.z);
  return r;
}

Vector outer_shift_candidate(const MpcProblem& outer, const TrajectoryPlan& prev,
                             const TerminalGainSet& gains) {
  const int horizon = outer.horizon();
  std::vector<Vector> inputs(prev.inputs.begin() + 1, prev.inputs.end());
  Vector x = outer.x0;
  for (int i = 0; i + 1 < horizon; ++i) x = outer.a * x + outer.b * inputs[i] + outer.exogenous[i];
  inputs.push_back(-gains.k1 * x);
  return stack_inputs(inputs);
}

Vector inner_shift_candidate(const MpcProblem& inner, const TrajectoryPlan& prev,
                             const TerminalGainSet& gains, const std::vector<Vector>& xf_traj,
                             const std::vector<Vector>& vdes_traj) {
  const int horizon = inner.horizon();
  std::vector<Vector> inputs(prev.inputs.begin() + 1, prev.inputs.end());
  Vector xt = inner.x0;
  for (int i = 0; i + 1 < horizon; ++i) {
    xt = inner.a * xt + inner.b * inputs[i] + inner.exogenous[i];
  }
  const Vector x2 = xt + xf_traj[horizon - 1];
  inputs.push_back(gains.k21 * vdes_traj[horizon - 1] - gains.k22 * x2);
  return stack_inputs(inputs);
}

double dynamics_residual(const MpcProblem& p, const TrajectoryPlan& plan) {
  double worst = (plan.states.front() - p.x0).cwiseAbs().maxCoeff();
  for (int i = 0; i < p.horizon(); ++i) {
    const Vector next = p.a * plan.states[i] + p.b * plan.inputs[i] + p.exogenous[i];
    worst = std::max(worst, (plan.states[i + 1] - next).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace hmpc
