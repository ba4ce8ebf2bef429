#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hmpc/design.h"

namespace hmpc {

enum class ControlMode { kMpc, kTerminal };
std::string to_string(ControlMode mode);

struct StepRecord {
  int k = 0;
  StateBundle state;
  Vector u;
  Vector vdes;
  ControlMode mode = ControlMode::kMpc;
  bool in_g1 = false;
  bool in_g2 = false;
  double v1 = 0.0;
  double v2 = 0.0;
  bool feasible_outer = true;
  bool feasible_inner = true;
  int iterations_outer = 0;
  int iterations_inner = 0;
  /// Largest constraint violation of the optimal plans used at this step,
  /// re-evaluated outside the solver.
  double max_violation = 0.0;
};

struct SimulationRun {
  std::string scenario;
  std::vector<StepRecord> records;
  /// Operational membership in X: both k = 0 solves succeeded.
  bool in_x = false;
  int infeasible_solves = 0;
  std::optional<int> k_g;
  /// Set when a k >= 1 solve failed; carries the problem dump.
  std::string fault;
  std::string fault_dump;
  /// Final |v~ change| of the k = 0 outer/inner alternation.
  double initial_consistency = 0.0;
};

struct HarnessOptions {
  SolverOptions solver;
  int max_alternations = 50;
};

/// Sequential closed loop under the switching law: terminal laws inside
/// G1 x G2, outer-then-inner MPC otherwise.
class Harness {
 public:
  Harness(const ControllerDesign& design, StateBundle initial, HarnessOptions opts = {});

  /// k = 0 probe. Solves both problems without rate constraints, alternating
  /// until the exchanged v~ trajectory is self-consistent. Returns false when
  /// the initial state is outside X.
  bool initialize();
  /// Advances one step. Throws TheoryViolationError on an MPC failure at k >= 1.
  StepRecord step();

  int time() const { return k_; }
  const StateBundle& state() const { return state_; }
  double initial_consistency() const { return consistency_; }
  const TrajectoryPlan& outer_plan() const { return outer_plan_; }
  const TrajectoryPlan& inner_plan() const { return inner_plan_; }

 private:
  struct Solved {
    MpcProblem problem;
    MpcResult result;
  };
  Solved solve_outer(const std::vector<Vector>& vtilde, const TrajectoryPlan* prev,
                     const Vector& warm);
  Solved solve_inner(const TrajectoryPlan& outer, const TrajectoryPlan* prev, const Vector& warm);
  std::vector<Vector> xf_trajectory(const TrajectoryPlan& outer) const;
  std::vector<Vector> vtilde_trajectory(const TrajectoryPlan& inner, int first) const;

  const ControllerDesign& d_;
  StateBundle state_;
  HarnessOptions opts_;
  int k_ = 0;
  bool initialized_ = false;
  bool pending_initial_ = false;
  TrajectoryPlan outer_plan_;
  TrajectoryPlan inner_plan_;
  int outer_iterations_ = 0;
  int inner_iterations_ = 0;
  double initial_violation_ = 0.0;
  double consistency_ = 0.0;
};

SimulationRun run_closed_loop(const ControllerDesign& design, const StateBundle& initial, int steps,
                              const std::string& scenario = "", HarnessOptions opts = {});

struct Verdict {
  bool passed = true;
  std::string detail;
  std::vector<int> steps;
};

struct CertificationReport {
  Verdict feasibility;
  Verdict convergence;
  Verdict invariance;
  Verdict stability;
  int k_g = -1;
  int bound = 0;
  bool all_passed() const;
};

CertificationReport certify_run(const SimulationRun& run, const ControllerDesign& design,
                                double stability_tol = 1e-6, int stability_window = 500);

void write_trace(std::ostream& os, const SimulationRun& run);

}  // namespace hmpc
