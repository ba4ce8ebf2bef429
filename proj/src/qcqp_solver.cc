#include "hmpc/qcqp_solver.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hmpc/errors.h"

namespace hmpc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One constraint block in the scaled splitting space v = A z.
struct Segment {
  bool ball = false;
  Eigen::Index row = 0;
  Eigen::Index rows = 0;
  Vector center;
  double radius = 0.0;
  Vector lower;
  Vector upper;
};

struct Splitting {
  Matrix a;
  std::vector<Segment> segments;
};

Splitting build_splitting(const QcqpProblem& p) {
  const Eigen::Index n = p.size();
  Eigen::Index m = 0;
  for (const auto& b : p.balls) m += b.w.rows();
  for (const auto& b : p.boxes) m += b.s.rows();
  Splitting sp;
  sp.a = Matrix::Zero(m, n);
  Eigen::Index row = 0;
  for (const auto& b : p.balls) {
    if (b.w.cols() != n || b.offset.size() != b.w.rows()) {
      throw StructuralError(b.name, "ball constraint has inconsistent dimensions");
    }
    const double scale = std::max(spectral_norm(b.w), 1e-12);
    Segment seg;
    seg.ball = true;
    seg.row = row;
    seg.rows = b.w.rows();
    seg.center = -b.offset / scale;
    seg.radius = b.radius / scale;
    sp.a.middleRows(row, seg.rows) = b.w / scale;
    sp.segments.push_back(std::move(seg));
    row += b.w.rows();
  }
  for (const auto& b : p.boxes) {
    if (b.s.cols() != n || b.offset.size() != b.s.rows() || b.lower.size() != b.s.rows() ||
        b.upper.size() != b.s.rows()) {
      throw StructuralError(b.name, "box constraint has inconsistent dimensions");
    }
    Segment seg;
    seg.row = row;
    seg.rows = b.s.rows();
    seg.lower.resize(seg.rows);
    seg.upper.resize(seg.rows);
    for (Eigen::Index i = 0; i < seg.rows; ++i) {
      const double scale = std::max(b.s.row(i).norm(), 1e-12);
      sp.a.row(row + i) = b.s.row(i) / scale;
      seg.lower(i) = (b.lower(i) - b.offset(i)) / scale;
      seg.upper(i) = (b.upper(i) - b.offset(i)) / scale;
    }
    sp.segments.push_back(std::move(seg));
    row += b.s.rows();
  }
  return sp;
}

Vector project(const Splitting& sp, const Vector& v) {
  Vector out = v;
  for (const auto& seg : sp.segments) {
    auto block = out.segment(seg.row, seg.rows);
    if (seg.ball) {
      const Vector d = block - seg.center;
      const double norm = d.norm();
      if (norm > seg.radius) block = seg.center + d * (seg.radius / norm);
    } else {
      block = block.cwiseMax(seg.lower).cwiseMin(seg.upper);
    }
  }
  return out;
}

// sup over the constraint set of dy' v.
double support(const Splitting& sp, const Vector& dy) {
  double s = 0.0;
  for (const auto& seg : sp.segments) {
    const auto d = dy.segment(seg.row, seg.rows);
    if (seg.ball) {
      s += d.dot(seg.center) + seg.radius * d.norm();
      continue;
    }
    for (Eigen::Index i = 0; i < seg.rows; ++i) {
      if (d(i) > 0.0) s += std::isinf(seg.upper(i)) ? kInf : d(i) * seg.upper(i);
      if (d(i) < 0.0) s += std::isinf(seg.lower(i)) ? kInf : d(i) * seg.lower(i);
    }
  }
  return s;
}

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

double QcqpProblem::objective(const Vector& z) const {
  return 0.5 * z.dot(hessian * z) + linear.dot(z) + constant;
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kIterationCap:
      return "iteration_cap";
  }
  return "unknown";
}

std::vector<ConstraintResidual> constraint_residuals(const QcqpProblem& p, const Vector& z) {
  std::vector<ConstraintResidual> out;
  for (const auto& b : p.balls) {
    out.push_back({b.name, std::max(0.0, (b.w * z + b.offset).norm() - b.radius)});
  }
  for (const auto& b : p.boxes) {
    const Vector v = b.s * z + b.offset;
    const double over = (v - b.upper).maxCoeff();
    const double under = (b.lower - v).maxCoeff();
    out.push_back({b.name, std::max({0.0, over, under})});
  }
  return out;
}

double max_violation(const QcqpProblem& p, const Vector& z) {
  double worst = 0.0;
  for (const auto& r : constraint_residuals(p, z)) worst = std::max(worst, r.violation);
  return worst;
}

QcqpSolution solve(const QcqpProblem& p, const Vector& warm_start, const SolverOptions& opts) {
  const Eigen::Index n = p.size();
  if (p.hessian.rows() != n || p.hessian.cols() != n) {
    throw StructuralError("hessian", "size does not match the linear term");
  }
  const Splitting sp = build_splitting(p);
  const Matrix& a = sp.a;
  const Matrix at = a.transpose();
  const Matrix& h = p.hessian;
  const Vector& g = p.linear;

  QcqpSolution sol;
  auto finish = [&](Vector x, SolveStatus status, int iterations) {
    sol.z = std::move(x);
    sol.status = status;
    sol.iterations = iterations;
    sol.objective = p.objective(sol.z);
    sol.residuals = constraint_residuals(p, sol.z);
    sol.max_violation = max_violation(p, sol.z);
    return sol;
  };

  if (a.rows() == 0) {
    Vector x = h.completeOrthogonalDecomposition().solve(-g);
    sol.dual_residual = inf_norm(h * x + g);
    return finish(std::move(x), SolveStatus::kOptimal, 0);
  }

  Vector x = warm_start.size() == n ? warm_start : Vector::Zero(n);
  Vector z = project(sp, a * x);
  Vector y = Vector::Zero(a.rows());
  double rho = opts.rho;
  const Matrix hs = h + opts.sigma * Matrix::Identity(n, n);
  const Matrix ata = at * a;
  Eigen::LLT<Matrix> kkt(hs + rho * ata);

  for (int it = 1; it <= opts.max_iterations; ++it) {
    const Vector xt = kkt.solve(opts.sigma * x - g + at * (rho * z - y));
    const Vector zt = a * xt;
    x = opts.relaxation * xt + (1.0 - opts.relaxation) * x;
    const Vector zr = opts.relaxation * zt + (1.0 - opts.relaxation) * z;
    const Vector z_next = project(sp, zr + y / rho);
    const Vector dy = rho * (zr - z_next);
    y += dy;
    z = z_next;

    const Vector ax = a * x;
    const Vector hx = h * x;
    const Vector aty = at * y;
    sol.primal_residual = inf_norm(ax - z);
    sol.dual_residual = inf_norm(hx + g + aty);
    const double scale_p = std::max(inf_norm(ax), inf_norm(z));
    const double scale_d = std::max({inf_norm(hx), inf_norm(aty), inf_norm(g)});
    if (sol.primal_residual <= opts.eps_abs + opts.eps_rel * scale_p &&
        sol.dual_residual <= opts.eps_abs + opts.eps_rel * scale_d &&
        max_violation(p, x) <= opts.feasibility_tol) {
      return finish(std::move(x), SolveStatus::kOptimal, it);
    }

    const double dy_norm = inf_norm(dy);
    if (dy_norm > 1e-12 && inf_norm(at * dy) <= opts.eps_infeasible * dy_norm &&
        support(sp, dy) <= -opts.eps_infeasible * dy_norm) {
      return finish(std::move(x), SolveStatus::kInfeasible, it);
    }

    if (it % opts.adapt_interval == 0) {
      const double rp = sol.primal_residual / std::max(scale_p, 1e-12);
      const double rd = sol.dual_residual / std::max(scale_d, 1e-12);
      const double ratio = std::sqrt(rp / std::max(rd, 1e-300));
      if (ratio > 5.0 || ratio < 0.2) {
        rho = std::clamp(rho * ratio, 1e-6, 1e6);
        kkt.compute(hs + rho * ata);
      }
    }
  }
  return finish(std::move(x), SolveStatus::kIterationCap, opts.max_iterations);
}

}  // namespace hmpc
