#pragma once

#include <string>
#include <vector>

#include "hmpc/linalg.h"

namespace hmpc {

/// ||W z + offset||_2 <= radius.
struct BallConstraint {
  std::string name;
  Matrix w;
  Vector offset;
  double radius = 0.0;
};

/// lower <= S z + offset <= upper, row-wise.
struct BoxConstraint {
  std::string name;
  Matrix s;
  Vector offset;
  Vector lower;
  Vector upper;
};

/// minimize 0.5 z'Hz + g'z + c0 subject to ball and box constraints.
struct QcqpProblem {
  Matrix hessian;
  Vector linear;
  double constant = 0.0;
  std::vector<BallConstraint> balls;
  std::vector<BoxConstraint> boxes;

  int size() const { return static_cast<int>(linear.size()); }
  double objective(const Vector& z) const;
};

enum class SolveStatus { kOptimal, kInfeasible, kIterationCap };
std::string to_string(SolveStatus s);

struct ConstraintResidual {
  std::string name;
  double violation = 0.0;
};

struct QcqpSolution {
  Vector z;
  double objective = 0.0;
  SolveStatus status = SolveStatus::kIterationCap;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::vector<ConstraintResidual> residuals;
  double max_violation = 0.0;

  bool optimal() const { return status == SolveStatus::kOptimal; }
};

struct SolverOptions {
  double eps_abs = 1e-8;
  double eps_rel = 1e-8;
  double eps_infeasible = 1e-6;
  /// Largest constraint violation accepted for an optimal status.
  double feasibility_tol = 1e-7;
  int max_iterations = 50000;
  double rho = 0.1;
  double sigma = 1e-6;
  double relaxation = 1.6;
  int adapt_interval = 25;
};

/// Evaluates every constraint directly at z, in problem units.
std::vector<ConstraintResidual> constraint_residuals(const QcqpProblem& p, const Vector& z);
double max_violation(const QcqpProblem& p, const Vector& z);

/// Operator-splitting (ADMM) solve with adaptive step size. Deterministic for
/// a given problem and warm start. An empty warm start means z = 0.
QcqpSolution solve(const QcqpProblem& p, const Vector& warm_start = Vector(),
                   const SolverOptions& opts = {});

}  // namespace hmpc
