#include "hmpc/closed_loop.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hmpc/errors.h"

namespace hmpc {
namespace {

double max_gap(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, (a[i] - b[i]).norm());
  return worst;
}

std::string vec_str(const Vector& v) {
  std::ostringstream os;
  os.precision(17);
  os << "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
  os << "]";
  return os.str();
}

std::string dump_problem(const std::string& which, const MpcProblem& p, const QcqpSolution& s) {
  std::ostringstream os;
  os.precision(17);
  os << which << " problem at k=" << p.stamp << "\n";
  os << "x0 = " << vec_str(p.x0) << "\n";
  os << "rate_constrained = " << p.rate_constrained << ", rate_radius = " << p.rate_radius << "\n";
  os << "status = " << to_string(s.status) << ", iterations = " << s.iterations
     << ", primal_residual = " << s.primal_residual << ", dual_residual = " << s.dual_residual
     << "\n";
  for (const auto& r : s.residuals) os << "  " << r.name << " violation = " << r.violation << "\n";
  os << "z = " << vec_str(s.z) << "\n";
  return os.str();
}

Vector stacked_error(const CascadeModel& m, const StateBundle& s) {
  Vector v(s.x1aug().size() + m.n2());
  v << s.x1aug(), s.xtilde();
  return v;
}

}  // namespace

std::string to_string(ControlMode mode) {
  return mode == ControlMode::kTerminal ? "terminal" : "mpc";
}

Harness::Harness(const ControllerDesign& design, StateBundle initial, HarnessOptions opts)
    : d_(design), state_(std::move(initial)), opts_(opts) {}

std::vector<Vector> Harness::xf_trajectory(const TrajectoryPlan& outer) const {
  const int n2 = d_.model.n2();
  std::vector<Vector> out;
  for (const auto& x : outer.states) out.push_back(x.tail(n2));
  return out;
}

std::vector<Vector> Harness::vtilde_trajectory(const TrajectoryPlan& inner, int first) const {
  std::vector<Vector> out;
  for (int i = 0; i < d_.budget.horizon; ++i) out.push_back(d_.model.c() * inner.states[first + i]);
  return out;
}

Harness::Solved Harness::solve_outer(const std::vector<Vector>& vtilde, const TrajectoryPlan* prev,
                                     const Vector& warm) {
  MpcProblem p = build_outer_problem(d_.aug, d_.sets, d_.budget, k_, state_.x1aug(), vtilde, prev,
                                     d_.params.outer_weights);
  const Vector start = prev ? outer_shift_candidate(p, *prev, d_.gains) : warm;
  MpcResult r = solve_mpc(p, start, opts_.solver);
  return {std::move(p), std::move(r)};
}

Harness::Solved Harness::solve_inner(const TrajectoryPlan& outer, const TrajectoryPlan* prev,
                                     const Vector& warm) {
  const auto xf = xf_trajectory(outer);
  MpcProblem p = build_inner_problem(d_.model, d_.sets, d_.budget, k_, state_.xtilde(), xf,
                                     outer.inputs, prev, d_.params.inner_weights);
  const Vector start =
      prev ? inner_shift_candidate(p, *prev, d_.gains, xf, outer.inputs) : warm;
  MpcResult r = solve_mpc(p, start, opts_.solver);
  return {std::move(p), std::move(r)};
}

bool Harness::initialize() {
  const int horizon = d_.budget.horizon;
  const int k_saved = k_;
  k_ = 0;
  std::vector<Vector> vtilde(horizon, Vector::Zero(d_.model.q()));
  vtilde[0] = state_.vtilde(d_.model);
  Vector warm_outer, warm_inner;
  double gap = 0.0;
  bool ok = false;
  for (int round = 0; round < opts_.max_alternations; ++round) {
    Solved outer = solve_outer(vtilde, nullptr, warm_outer);
    if (!outer.result.solution.optimal()) break;
    Solved inner = solve_inner(outer.result.plan, nullptr, warm_inner);
    if (!inner.result.solution.optimal()) break;
    outer_plan_ = outer.result.plan;
    inner_plan_ = inner.result.plan;
    outer_iterations_ = outer.result.solution.iterations;
    inner_iterations_ = inner.result.solution.iterations;
    initial_violation_ =
        std::max(outer.result.solution.max_violation, inner.result.solution.max_violation);
    warm_outer = outer.result.solution.z;
    warm_inner = inner.result.solution.z;
    const auto next = vtilde_trajectory(inner_plan_, 0);
    gap = max_gap(next, vtilde);
    vtilde = next;
    ok = true;
    if (gap <= 1e-3 * d_.budget.eps_vtilde_max) break;
  }
  consistency_ = gap;
  k_ = k_saved;
  ok = ok && gap <= d_.budget.eps_vtilde_max;
  initialized_ = ok;
  pending_initial_ = ok;
  if (ok) {
    outer_plan_.stamp = k_;
    inner_plan_.stamp = k_;
  }
  return ok;
}

StepRecord Harness::step() {
  if (!initialized_) throw ProtocolError("harness stepped before a successful initialization");
  StepRecord rec;
  rec.k = k_;
  rec.state = state_;
  const Vector x1aug = state_.x1aug();
  const Vector xt = state_.xtilde();
  rec.v1 = d_.sets.g1.value(x1aug);
  rec.v2 = d_.sets.g2.value(xt);
  rec.in_g1 = d_.sets.g1.contains(x1aug);
  rec.in_g2 = d_.sets.g2.contains(xt);

  if (rec.in_g1 && rec.in_g2) {
    rec.mode = ControlMode::kTerminal;
    const TerminalAction act = terminal_action(d_.gains, state_);
    rec.vdes = act.vdes;
    rec.u = act.u;
  } else {
    rec.mode = ControlMode::kMpc;
    const bool fresh = pending_initial_ && outer_plan_.stamp == k_;
    const bool continuing = !pending_initial_ && outer_plan_.stamp == k_ - 1;
    if (!fresh && !continuing) {
      // Plans went stale in terminal mode: re-probe as at k = 0.
      if (!initialize()) {
        throw TheoryViolationError("re-entry probe after terminal mode failed at k=" +
                                   std::to_string(k_),
                                   "");
      }
    }
    if (pending_initial_) {
      rec.iterations_outer = outer_iterations_;
      rec.iterations_inner = inner_iterations_;
      rec.max_violation = initial_violation_;
    } else {
      const auto vtilde = vtilde_trajectory(inner_plan_, 1);
      Solved outer = solve_outer(vtilde, &outer_plan_, Vector());
      rec.iterations_outer = outer.result.solution.iterations;
      if (!outer.result.solution.optimal()) {
        throw TheoryViolationError("outer MPC solve failed at k=" + std::to_string(k_),
                                   dump_problem("outer", outer.problem, outer.result.solution));
      }
      Solved inner = solve_inner(outer.result.plan, &inner_plan_, Vector());
      rec.iterations_inner = inner.result.solution.iterations;
      if (!inner.result.solution.optimal()) {
        throw TheoryViolationError("inner MPC solve failed at k=" + std::to_string(k_),
                                   dump_problem("inner", inner.problem, inner.result.solution));
      }
      rec.max_violation =
          std::max(outer.result.solution.max_violation, inner.result.solution.max_violation);
      outer_plan_ = std::move(outer.result.plan);
      inner_plan_ = std::move(inner.result.plan);
    }
    rec.vdes = outer_plan_.inputs.front();
    rec.u = inner_plan_.inputs.front();
  }
  pending_initial_ = false;
  state_ = step_true(d_.model, state_, rec.u, rec.vdes);
  ++k_;
  return rec;
}

SimulationRun run_closed_loop(const ControllerDesign& design, const StateBundle& initial, int steps,
                              const std::string& scenario, HarnessOptions opts) {
  SimulationRun run;
  run.scenario = scenario;
  Harness h(design, initial, opts);
  run.in_x = h.initialize();
  run.initial_consistency = h.initial_consistency();
  if (!run.in_x) return run;
  for (int k = 0; k < steps; ++k) {
    try {
      run.records.push_back(h.step());
    } catch (const TheoryViolationError& e) {
      ++run.infeasible_solves;
      run.fault = e.what();
      run.fault_dump = e.dump();
      break;
    }
  }
  for (const auto& r : run.records) {
    if (r.in_g1 && r.in_g2) {
      run.k_g = r.k;
      break;
    }
  }
  return run;
}

bool CertificationReport::all_passed() const {
  return feasibility.passed && convergence.passed && invariance.passed && stability.passed;
}

CertificationReport certify_run(const SimulationRun& run, const ControllerDesign& design,
                                double stability_tol, int stability_window) {
  CertificationReport rep;
  rep.bound = std::max(design.budget.n1_star, design.budget.n2_star) + design.budget.horizon;
  if (!run.in_x) {
    for (Verdict* v : {&rep.feasibility, &rep.convergence, &rep.invariance, &rep.stability}) {
      v->passed = false;
      v->detail = "initial state outside X";
    }
    return rep;
  }

  if (run.infeasible_solves > 0) {
    rep.feasibility.passed = false;
    rep.feasibility.detail = run.fault;
    rep.feasibility.steps.push_back(static_cast<int>(run.records.size()));
  }
  for (const auto& r : run.records) {
    if (r.max_violation > 1e-6) {
      rep.feasibility.passed = false;
      rep.feasibility.steps.push_back(r.k);
    }
  }
  if (rep.feasibility.passed) rep.feasibility.detail = "no infeasible solves";
  else if (rep.feasibility.detail.empty()) rep.feasibility.detail = "constraint residual above 1e-6";

  if (!run.k_g) {
    rep.convergence.passed = false;
    rep.convergence.detail = "G1 x G2 never reached";
  } else {
    rep.k_g = *run.k_g;
    rep.convergence.passed = rep.k_g <= rep.bound;
    rep.convergence.detail =
        "k_G = " + std::to_string(rep.k_g) + ", bound = " + std::to_string(rep.bound);
    if (!rep.convergence.passed) rep.convergence.steps.push_back(rep.k_g);
  }

  const auto& g1 = design.sets.g1;
  const auto& g2 = design.sets.g2;
  const double slack = 1.0 + 1e-9;
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    const auto& r = run.records[i];
    if (!run.k_g || r.k < *run.k_g) continue;
    bool bad = r.mode != ControlMode::kTerminal;
    if (i + 1 < run.records.size()) {
      const auto& next = run.records[i + 1];
      bad = bad || next.v1 > g1.lambda_star * g1.level * slack ||
            next.v2 > g2.lambda_star * g2.level * slack;
    }
    if (bad) rep.invariance.steps.push_back(r.k);
  }
  rep.invariance.passed = rep.invariance.steps.empty() && run.k_g.has_value();
  rep.invariance.detail = rep.invariance.passed ? "no reversion, contraction held"
                          : run.k_g ? "reversion or contraction failure"
                                    : "G1 x G2 never reached";

  rep.stability.passed = false;
  if (!run.k_g) {
    rep.stability.detail = "G1 x G2 never reached";
  } else {
    for (const auto& r : run.records) {
      if (r.k < *run.k_g) continue;
      if (r.k > *run.k_g + stability_window) break;
      if (stacked_error(design.model, r.state).norm() <= stability_tol) {
        rep.stability.passed = true;
        rep.stability.detail = "norm below tolerance at k = " + std::to_string(r.k);
        break;
      }
    }
    if (!rep.stability.passed) {
      const int last = run.records.empty() ? 0 : run.records.back().k;
      rep.stability.detail = last < *run.k_g + stability_window
                                 ? "run ended before the tolerance was reached"
                                 : "tolerance not reached within the window";
      rep.stability.steps.push_back(last);
    }
  }
  return rep;
}

void write_trace(std::ostream& os, const SimulationRun& run) {
  if (run.records.empty()) {
    os << "k,mode,V1,V2,inG1,inG2,feasOuter,feasInner,iterOuter,iterInner\n";
    return;
  }
  const auto& first = run.records.front();
  auto header = [&os](const char* name, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) os << "," << name << "[" << i << "]";
  };
  os << "k,mode";
  header("x1", first.state.x1.size());
  header("x2", first.state.x2.size());
  header("xf", first.state.xf.size());
  header("u", first.u.size());
  header("vdes", first.vdes.size());
  os << ",V1,V2,inG1,inG2,feasOuter,feasInner,iterOuter,iterInner\n";
  os.precision(17);
  for (const auto& r : run.records) {
    os << r.k << "," << to_string(r.mode);
    for (const Vector* v : {&r.state.x1, &r.state.x2, &r.state.xf, &r.u, &r.vdes}) {
      for (Eigen::Index i = 0; i < v->size(); ++i) os << "," << (*v)(i);
    }
    os << "," << r.v1 << "," << r.v2 << "," << r.in_g1 << "," << r.in_g2 << ","
       << r.feasible_outer << "," << r.feasible_inner << "," << r.iterations_outer << ","
       << r.iterations_inner << "\n";
  }
}

}  // namespace hmpc
