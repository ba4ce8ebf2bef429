// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "design_fixture.h"
#include "hmpc/closed_loop.h"
#include "hmpc/errors.h"
#include "hmpc/sampling.h"
#include "hmpc/scenario.h"
#include "qcqp_oracle.h"

namespace {

using namespace hmpc;
using testing::sys_a_design;

struct Outcome {
  bool passed = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double time_limit;  // seconds, <= 0 for none
  std::function<Outcome()> body;
};

// Closed-loop runs shared by criteria 6 to 9.
struct LoopCampaign {
  struct Run {
    MatchingMode mode;
    SimulationRun sim;
    CertificationReport report;
  };
  std::vector<Run> exterior;
  std::vector<Run> interior;
  int rejected = 0;
};

const LoopCampaign& campaign() {
  static const LoopCampaign c = [] {
    LoopCampaign out;
    const int steps = 700;
    std::mt19937_64 rng(0xACCE);
    std::uniform_real_distribution<double> outer_scale(1.2, 3.0);
    std::uniform_real_distribution<double> inner_scale(0.5, 3.0);
    for (MatchingMode mode : {MatchingMode::kExact, MatchingMode::kInexact}) {
      const ControllerDesign& d = sys_a_design(mode);
      int accepted = 0;
      while (accepted < 20) {
        const StateBundle s0 =
            testing::scaled_boundary_state(d, rng, outer_scale(rng), inner_scale(rng));
        SimulationRun sim = run_closed_loop(d, s0, steps);
        if (!sim.in_x) {
          ++out.rejected;
          continue;
        }
        CertificationReport rep = certify_run(sim, d);
        out.exterior.push_back({mode, std::move(sim), rep});
        ++accepted;
      }
      for (int t = 0; t < 5; ++t) {
        const StateBundle s0 = testing::scaled_boundary_state(d, rng, 0.99, 0.99);
        SimulationRun sim = run_closed_loop(d, s0, steps);
        CertificationReport rep = certify_run(sim, d);
        out.interior.push_back({mode, std::move(sim), rep});
      }
    }
    return out;
  }();
  return c;
}

Outcome exact_identity() {
  const ControllerDesign& d = sys_a_design();
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Vector xt = testing::random_vector(rng, 2, t % 2 ? 1.0 : 100.0);
    const Vector xf = testing::random_vector(rng, 2, 10.0);
    const Vector vdes = testing::random_vector(rng, 1, 10.0);
    const Vector u = d.gains.k21 * vdes - d.gains.k22 * (xt + xf);
    const Vector next = error_step(d.model, xt, xf, u, vdes);
    worst = std::max(worst, (next - d.model.af() * xt).norm() / (1.0 + xt.norm()));
  }
  std::ostringstream os;
  os << "worst relative residual " << worst;
  return {worst <= 1e-10, os.str()};
}

Outcome dissipation() {
  Outcome out;
  std::ostringstream os;
  int violations = 0;
  std::mt19937_64 rng(2);
  for (MatchingMode mode : {MatchingMode::kExact, MatchingMode::kInexact}) {
    const LoopCertificates& c = sys_a_design(mode).certificates;
    const struct {
      const DissipationCertificate& cert;
      const Matrix& acl;
      const std::vector<Channel>& channels;
    } loops[] = {{c.outer, c.outer_acl, c.outer_channels}, {c.inner, c.inner_acl, c.inner_channels}};
    for (const auto& l : loops) {
      if (!verify_dissipation(l.cert, l.acl, l.channels)) {
        out.passed = false;
        os << to_string(mode) << " block test failed; ";
      }
      for (int t = 0; t < 1000; ++t) {
        const Vector x = testing::random_vector(rng, l.acl.rows(), t % 3 ? 1.0 : 100.0);
        Vector next = l.acl * x;
        double supply = -l.cert.alpha * l.cert.value(x);
        for (const Channel& ch : l.channels) {
          const Vector w = testing::random_vector(rng, ch.e.cols(), t % 2 ? 0.01 : 10.0);
          next += ch.e * w;
          supply += l.cert.gamma_bar(ch.name) * w.squaredNorm();
        }
        const double lhs = l.cert.value(next) - l.cert.value(x);
        if (lhs > supply + 1e-9 * std::max(1.0, l.cert.value(x))) ++violations;
      }
    }
  }
  if (violations) out.passed = false;
  os << "4 block tests, 4000 sampled inequalities, " << violations << " violations";
  out.detail = os.str();
  return out;
}

Outcome contraction() {
  int violations = 0;
  for (MatchingMode mode : {MatchingMode::kExact, MatchingMode::kInexact}) {
    const ControllerDesign& d = sys_a_design(mode);
    std::mt19937_64 rng(mode == MatchingMode::kExact ? 3 : 4);
    for (int t = 0; t < 10000; ++t) {
      const Vector x1aug = d.sets.g1.boundary_point(testing::random_unit(rng, 4));
      const Vector xt = d.sets.g2.boundary_point(testing::random_unit(rng, 2));
      const testing::Successor s = testing::terminal_successor(d, x1aug, xt);
      const bool ok = d.model.input_box().contains(s.u) &&
                      d.sets.g1.value(s.x1aug) <= d.sets.g1.lambda_star * d.sets.g1.level &&
                      d.sets.g2.value(s.xtilde) <= d.sets.g2.lambda_star * d.sets.g2.level;
      violations += !ok;
    }
  }
  return {violations == 0,
          "2 x 10000 boundary samples, " + std::to_string(violations) + " violations"};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HMPC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome solvability_gate() {
  const std::string dir = HMPC_SCENARIO_DIR;
  const int code = run_cli("synthesize --scenario " + dir + "/sys_a_inexact_gamma_fault.json --out " +
                           "/tmp/hmpc_acceptance_fault.json");
  bool rejected_in_process = false;
  try {
    design_from_scenario(load_scenario(dir + "/sys_a_inexact_gamma_fault.json"));
  } catch (const SolvabilityError&) {
    rejected_in_process = true;
  }

  const ControllerDesign d = design_from_scenario(load_scenario(dir + "/sys_a_inexact.json"));
  const auto& c = d.certificates;
  const LevelEquations eq = level_equations(c.outer, c.inner, d.caps, d.gains.k1, d.model.c(),
                                            d.sets.g1.epsilon, d.sets.g2.epsilon);
  const double v1 = d.sets.g1.level;
  const double v2 = d.sets.g2.level;
  const double residual =
      std::max(std::abs(v1 - eq.rhs_v1(v2)) / v1, std::abs(v2 - eq.rhs_v2(v1)) / v2);
  std::ostringstream os;
  os << "fault fixture exit " << code << ", fixed-point residual " << residual
     << ", solvability " << d.sets.solvability_lhs << " >= " << d.sets.solvability_rhs;
  return {code == 3 && rejected_in_process && residual <= 1e-12 && d.sets.solvability_ok,
          os.str()};
}

Outcome rate_budget() {
  int violations = 0;
  int evaluated = 0;
  std::ostringstream os;
  for (MatchingMode mode : {MatchingMode::kExact, MatchingMode::kInexact}) {
    const SamplingReport r = run_sampling_checks(sys_a_design(mode), 1000, 5);
    for (const char* name : {"margin", "outer_chain", "inner_chain", "ref_chain"}) {
      violations += r.violations.at(name);
      evaluated += r.evaluated.at(name);
      if (r.evaluated.at(name) < 1000) violations += 1;
    }
  }
  os << evaluated << " sweep checks over margins and chains, " << violations << " violations";
  return {violations == 0, os.str()};
}

Outcome persistent_feasibility() {
  const LoopCampaign& c = campaign();
  int infeasible = 0;
  for (const auto& r : c.exterior) infeasible += r.sim.infeasible_solves + !r.sim.fault.empty();
  std::ostringstream os;
  os << c.exterior.size() << " runs (20 exact, 20 inexact, " << c.rejected
     << " candidate states outside X skipped), " << infeasible << " infeasible solves";
  return {infeasible == 0 && c.exterior.size() == 40, os.str()};
}

Outcome convergence() {
  const LoopCampaign& c = campaign();
  int failures = 0;
  int worst = 0;
  int bound = 0;
  for (const auto& r : c.exterior) {
    failures += !(r.report.convergence.passed && r.report.invariance.passed);
    worst = std::max(worst, r.report.k_g);
    bound = r.report.bound;
  }
  std::ostringstream os;
  os << "max k_G " << worst << " (bound " << bound << "), " << failures << " runs failing";
  return {failures == 0, os.str()};
}

Outcome stability() {
  const LoopCampaign& c = campaign();
  int failures = 0;
  int interior_mpc_steps = 0;
  for (const auto& r : c.exterior) failures += !r.report.stability.passed;
  for (const auto& r : c.interior) {
    if (!r.sim.in_x || r.sim.k_g != 0) ++failures;
    for (const StepRecord& s : r.sim.records) interior_mpc_steps += s.mode != ControlMode::kTerminal;
    failures += !r.report.stability.passed;
  }
  std::ostringstream os;
  os << failures << " failing runs, " << interior_mpc_steps
     << " MPC steps in runs started inside G1 x G2";
  return {failures == 0 && interior_mpc_steps == 0, os.str()};
}

Outcome solver() {
  std::mt19937_64 rng(9);
  double worst_gap = 0.0;
  bool ok = true;
  for (int t = 0; t < 20; ++t) {
    const QcqpProblem p = testing::random_qcqp(rng, 2 + t % 5);
    const auto oracle = testing::enumerate_qcqp(p);
    const QcqpSolution s = solve(p);
    if (!oracle || !s.optimal() || s.max_violation > 1e-6) {
      ok = false;
      continue;
    }
    worst_gap = std::max(worst_gap, std::abs(s.objective - *oracle));
  }
  double worst_residual = 0.0;
  for (const auto* runs : {&campaign().exterior, &campaign().interior}) {
    for (const auto& r : *runs) {
      for (const StepRecord& s : r.sim.records) worst_residual = std::max(worst_residual, s.max_violation);
    }
  }
  std::ostringstream os;
  os << "worst oracle gap " << worst_gap << ", worst closed-loop residual " << worst_residual;
  return {ok && worst_gap <= 1e-5 && worst_residual <= 1e-6, os.str()};
}

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "exact matching identity", 1.0, exact_identity},
      {2, "dissipation certificates", 5.0, dissipation},
      {3, "lambda-contraction", 30.0, contraction},
      {4, "inexact solvability gate", 0.0, solvability_gate},
      {5, "rate-budget soundness", 60.0, rate_budget},
      {6, "persistent feasibility", 0.0, persistent_feasibility},
      {7, "finite-time convergence", 0.0, convergence},
      {8, "asymptotic stability", 0.0, stability},
      {9, "solver correctness", 0.0, solver},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0.0 && secs >= c.time_limit) {
      o.passed = false;
      o.detail += ", over time limit";
    }
    failed += !o.passed;
    std::printf("criterion %d: %s  %s (%s, %.2fs)\n", c.id, o.passed ? "PASS" : "FAIL", c.title,
                o.detail.c_str(), secs);
  }
  std::printf("%d of 9 criteria passed\n", 9 - failed);
  return failed == 0 ? 0 : 1;
}
