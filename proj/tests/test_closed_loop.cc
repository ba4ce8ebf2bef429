#include <gtest/gtest.h>

#include <sstream>

#include "design_fixture.h"
#include "hmpc/closed_loop.h"

namespace hmpc {
namespace {

using testing::sys_a_design;

TEST(ClosedLoop, OriginStaysTerminal) {
  const ControllerDesign& d = sys_a_design();
  const SimulationRun run = run_closed_loop(d, StateBundle::zero(d.model), 30);
  ASSERT_TRUE(run.in_x);
  ASSERT_EQ(run.k_g, 0);
  for (const StepRecord& r : run.records) {
    EXPECT_EQ(r.mode, ControlMode::kTerminal);
    EXPECT_EQ(r.v1, 0.0);
    EXPECT_EQ(r.v2, 0.0);
  }
}

TEST(ClosedLoop, InsideTerminalSetsUsesTerminalLawsOnly) {
  for (MatchingMode mode : {MatchingMode::kExact, MatchingMode::kInexact}) {
    const ControllerDesign& d = sys_a_design(mode);
    std::mt19937_64 rng(5);
    for (int t = 0; t < 5; ++t) {
      const StateBundle s0 = testing::scaled_boundary_state(d, rng, 0.95, 0.95);
      const SimulationRun run = run_closed_loop(d, s0, 100);
      ASSERT_TRUE(run.in_x);
      ASSERT_EQ(run.k_g, 0);
      for (std::size_t i = 0; i + 1 < run.records.size(); ++i) {
        const StepRecord& r = run.records[i];
        EXPECT_EQ(r.mode, ControlMode::kTerminal);
        EXPECT_LE(run.records[i + 1].v1, d.sets.g1.lambda_star * d.sets.g1.level * (1 + 1e-9));
        EXPECT_LE(run.records[i + 1].v2, d.sets.g2.lambda_star * d.sets.g2.level * (1 + 1e-9));
      }
    }
  }
}

TEST(ClosedLoop, NominalRunPassesAllVerdicts) {
  for (MatchingMode mode : {MatchingMode::kExact, MatchingMode::kInexact}) {
    const ControllerDesign& d = sys_a_design(mode);
    std::mt19937_64 rng(11);
    const StateBundle s0 = testing::scaled_boundary_state(d, rng, 2.0, 1.5);
    const SimulationRun run = run_closed_loop(d, s0, 400, "nominal");
    ASSERT_TRUE(run.in_x);
    EXPECT_EQ(run.infeasible_solves, 0);
    const CertificationReport rep = certify_run(run, d);
    EXPECT_TRUE(rep.feasibility.passed) << rep.feasibility.detail;
    EXPECT_TRUE(rep.convergence.passed) << rep.convergence.detail;
    EXPECT_TRUE(rep.invariance.passed) << rep.invariance.detail;
    EXPECT_TRUE(rep.stability.passed) << rep.stability.detail;
    ASSERT_TRUE(run.k_g.has_value());
    EXPECT_LE(*run.k_g, rep.bound);
    for (const StepRecord& r : run.records) {
      EXPECT_LE(r.u.lpNorm<Eigen::Infinity>(), 2.0 + 1e-6);
      EXPECT_LE(r.max_violation, 1e-6);
    }
  }
}

TEST(ClosedLoop, FarStateIsOutsideX) {
  const ControllerDesign& d = sys_a_design();
  StateBundle s = StateBundle::zero(d.model);
  s.x1 = testing::vec({40, 10});
  const SimulationRun run = run_closed_loop(d, s, 10);
  EXPECT_FALSE(run.in_x);
  EXPECT_TRUE(run.records.empty());
}

TEST(ClosedLoop, InflatedRateBudgetIsPinpointed) {
  ControllerDesign d = sys_a_design();
  d.budget.delta_vdes_max *= 100;
  d.budget.delta_u_max *= 100;
  d.budget.eps_vtilde_max *= 100;
  d.budget.eps_xf_max *= 100;
  std::mt19937_64 rng(11);
  const StateBundle s0 = testing::scaled_boundary_state(d, rng, 2.5, 2.0);
  const SimulationRun run = run_closed_loop(d, s0, 300);
  ASSERT_TRUE(run.in_x);
  const CertificationReport rep = certify_run(run, d);
  // Either the loop ran into a solver failure, or it drifted past the horizon
  // bound; in both cases the report names the offending steps.
  if (!run.fault.empty()) {
    EXPECT_FALSE(rep.feasibility.passed);
    EXPECT_FALSE(rep.feasibility.steps.empty());
    EXPECT_FALSE(run.fault_dump.empty());
  } else if (!rep.all_passed()) {
    const bool pinpointed = !rep.feasibility.steps.empty() || !rep.convergence.steps.empty() ||
                            !rep.invariance.steps.empty() || !rep.stability.steps.empty();
    EXPECT_TRUE(pinpointed);
  } else {
    SUCCEED() << "inflated budget happened to stay within the theory on this trajectory";
  }
}

TEST(ClosedLoop, TraceHasHeaderAndOneRowPerStep) {
  const ControllerDesign& d = sys_a_design();
  std::mt19937_64 rng(3);
  const SimulationRun run = run_closed_loop(d, testing::scaled_boundary_state(d, rng, 1.5, 1.0), 20);
  std::ostringstream os;
  write_trace(os, run);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line.rfind("k,mode,x1[0]", 0), 0u) << line;
  EXPECT_NE(line.find("V1,V2,inG1,inG2"), std::string::npos);
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, static_cast<int>(run.records.size()));
}

TEST(ClosedLoop, HarnessRequiresInitialization) {
  const ControllerDesign& d = sys_a_design();
  Harness h(d, StateBundle::zero(d.model));
  ASSERT_TRUE(h.initialize());
  const StepRecord r = h.step();
  EXPECT_EQ(r.k, 0);
  EXPECT_EQ(h.time(), 1);
}

}  // namespace
}  // namespace hmpc
