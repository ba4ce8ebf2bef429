#pragma once

#include <vector>

#include "hmpc/contractive_sets.h"
#include "hmpc/lti_model.h"
#include "hmpc/qcqp_solver.h"
#include "hmpc/rate_budget.h"
#include "hmpc/terminal_synthesis.h"

namespace hmpc {

/// Predicted inputs (N) and states (N+1) of one MPC solve made at time `stamp`.
struct TrajectoryPlan {
  std::vector<Vector> inputs;
  std::vector<Vector> states;
  int stamp = 0;

  int horizon() const { return static_cast<int>(inputs.size()); }
  bool empty() const { return inputs.empty(); }
};

struct StageWeights {
  Matrix state;
  Matrix input;
};

/// Affine prediction x(i+1) = A x(i) + B z(i) + e(i), condensed in the input
/// trajectory z, with the QCQP built on it.
struct MpcProblem {
  QcqpProblem qp;
  Matrix a;
  Matrix b;
  Vector x0;
  std::vector<Vector> exogenous;
  int stamp = 0;
  double rate_radius = 0.0;
  bool rate_constrained = false;

  int horizon() const { return static_cast<int>(exogenous.size()); }
  TrajectoryPlan expand(const Vector& z) const;
};

/// Stacks an input trajectory into the decision vector.
Vector stack_inputs(const std::vector<Vector>& inputs);

/// Outer problem: v_des trajectory, v~ injected as a known sequence of N
/// q-vectors, terminal ellipsoids G1 at N-1 and lambda1 G1 at N, rate balls
/// around the previous plan for i = 0..N-2 unless `k == 0`.
MpcProblem build_outer_problem(const AugmentedOuterModel& aug, const SetPairCertificate& sets,
                               const RateBudget& budget, int k, const Vector& x1aug_k,
                               const std::vector<Vector>& vtilde_traj,
                               const TrajectoryPlan* vdes_prev, const StageWeights& weights);

/// Inner problem: u trajectory with xf(.|k) (N states) and v_des(.|k) from the
/// outer solve of the same step, terminal ellipsoid lambda2 G2 at N, rate balls,
/// and the input box at every index.
MpcProblem build_inner_problem(const CascadeModel& m, const SetPairCertificate& sets,
                               const RateBudget& budget, int k, const Vector& xtilde_k,
                               const std::vector<Vector>& xf_traj,
                               const std::vector<Vector>& vdes_traj, const TrajectoryPlan* u_prev,
                               const StageWeights& weights);

struct MpcResult {
  QcqpSolution solution;
  TrajectoryPlan plan;
};

MpcResult solve_mpc(const MpcProblem& p, const Vector& warm_start = Vector(),
                    const SolverOptions& opts = {});

/// Shifted previous plan with the terminal-law tail v_des = -K1 x1aug(k+N-1|k).
Vector outer_shift_candidate(const MpcProblem& outer, const TrajectoryPlan& prev,
                             const TerminalGainSet& gains);

/// Shifted previous plan with the tail u = K21 v_des(k+N-1|k) - K22 x2(k+N-1|k),
/// where x2 = x~ + xf.
Vector inner_shift_candidate(const MpcProblem& inner, const TrajectoryPlan& prev,
                             const TerminalGainSet& gains, const std::vector<Vector>& xf_traj,
                             const std::vector<Vector>& vdes_traj);

/// Largest deviation of a plan from its own dynamics.
double dynamics_residual(const MpcProblem& p, const TrajectoryPlan& plan);

}  // namespace hmpc
