#include <gtest/gtest.h>

#include "design_fixture.h"
#include "hmpc/errors.h"

namespace hmpc {
namespace {

using testing::sys_a_design;

std::vector<Vector> zeros(int n, Eigen::Index dim) {
  return std::vector<Vector>(n, Vector::Zero(dim));
}

TEST(MpcEngine, OriginGivesZeroPlan) {
  const ControllerDesign& d = sys_a_design();
  const int n = d.params.horizon;
  const MpcProblem outer = build_outer_problem(d.aug, d.sets, d.budget, 0,
                                               Vector::Zero(d.aug.a1aug.rows()),
                                               zeros(n, d.model.q()), nullptr, {});
  const MpcResult r = solve_mpc(outer);
  ASSERT_TRUE(r.solution.optimal());
  EXPECT_LT(r.solution.z.lpNorm<Eigen::Infinity>(), 1e-6);
  EXPECT_EQ(r.plan.horizon(), n);
  EXPECT_EQ(static_cast<int>(r.plan.states.size()), n + 1);
}

TEST(MpcEngine, ProtocolErrors) {
  const ControllerDesign& d = sys_a_design();
  const int n = d.params.horizon;
  const Vector x = Vector::Zero(d.aug.a1aug.rows());
  EXPECT_THROW(build_outer_problem(d.aug, d.sets, d.budget, 0, x, zeros(n - 1, 1), nullptr, {}),
               ProtocolError);
  EXPECT_THROW(build_outer_problem(d.aug, d.sets, d.budget, 1, x, zeros(n, 1), nullptr, {}),
               ProtocolError);
  EXPECT_THROW(build_inner_problem(d.model, d.sets, d.budget, 1, Vector::Zero(2), zeros(n, 2),
                                   zeros(n, 1), nullptr, {}),
               ProtocolError);
  TrajectoryPlan short_plan;
  short_plan.inputs = zeros(n - 2, 1);
  short_plan.states = zeros(n - 1, 4);
  EXPECT_THROW(build_outer_problem(d.aug, d.sets, d.budget, 1, x, zeros(n, 1), &short_plan, {}),
               ProtocolError);
}

TEST(MpcEngine, RateRadiusFollowsGeometricSchedule) {
  const ControllerDesign& d = sys_a_design();
  const int n = d.params.horizon;
  TrajectoryPlan prev;
  prev.inputs = zeros(n, 1);
  prev.states = zeros(n + 1, 4);
  const Vector x = Vector::Zero(4);
  const MpcProblem k0 = build_outer_problem(d.aug, d.sets, d.budget, 0, x, zeros(n, 1), nullptr, {});
  EXPECT_FALSE(k0.rate_constrained);
  for (int k : {1, 5, d.budget.n1_star, d.budget.n1_star + 20}) {
    const MpcProblem p = build_outer_problem(d.aug, d.sets, d.budget, k, x, zeros(n, 1), &prev, {});
    EXPECT_TRUE(p.rate_constrained);
    const int e = std::min(k, d.budget.n1_star);
    EXPECT_NEAR(p.rate_radius, d.budget.delta_vdes_max * std::pow(d.budget.beta, e), 1e-15);
    int balls = 0;
    for (const auto& b : p.qp.balls) balls += b.name.rfind("rate", 0) == 0;
    EXPECT_EQ(balls, n - 1);
  }
}

TEST(MpcEngine, InputBoxBindsAtTheEdgeOfFeasibility) {
  // Without the box every x~ reaches lambda2 G2 in N steps, so the largest
  // feasible initial error must saturate u.
  const ControllerDesign& d = sys_a_design();
  const int n = d.params.horizon;
  const Vector dir = testing::vec({1.0, 0.7});
  auto solve_at = [&](double scale) {
    const MpcProblem p = build_inner_problem(d.model, d.sets, d.budget, 0, scale * dir,
                                             zeros(n, 2), zeros(n, 1), nullptr, {});
    return solve_mpc(p);
  };
  double lo = 0.0;
  double hi = 1.0;
  while (solve_at(hi).solution.optimal()) hi *= 2.0;
  for (int it = 0; it < 30; ++it) {
    const double mid = 0.5 * (lo + hi);
    (solve_at(mid).solution.optimal() ? lo : hi) = mid;
  }
  EXPECT_FALSE(solve_at(hi).solution.optimal());
  EXPECT_EQ(solve_at(2.0 * hi).solution.status, SolveStatus::kInfeasible);
  const MpcResult r = solve_at(lo);
  ASSERT_TRUE(r.solution.optimal());
  double peak = 0.0;
  for (const Vector& u : r.plan.inputs) peak = std::max(peak, u.lpNorm<Eigen::Infinity>());
  EXPECT_LE(peak, 2.0 + 1e-6);
  EXPECT_NEAR(peak, 2.0, 1e-3);
}

TEST(MpcEngine, PlanSatisfiesDynamics) {
  const ControllerDesign& d = sys_a_design();
  const int n = d.params.horizon;
  const Vector x = d.sets.g1.boundary_point(testing::vec({1, -1, 0.5, 0.2}), 2.0);
  const MpcProblem outer =
      build_outer_problem(d.aug, d.sets, d.budget, 0, x, zeros(n, 1), nullptr, {});
  const MpcResult r = solve_mpc(outer);
  ASSERT_TRUE(r.solution.optimal());
  EXPECT_LE(dynamics_residual(outer, r.plan), 1e-10);
  EXPECT_LE(max_violation(outer.qp, r.solution.z), 1e-6);
  EXPECT_LE(d.sets.g1.value(r.plan.states[n]), d.sets.g1.lambda_star * d.sets.g1.level * (1 + 1e-6));
}

TEST(MpcEngine, OuterShiftCandidateIsFeasible) {
  const ControllerDesign& d = sys_a_design();
  const int n = d.params.horizon;
  const Vector x0 = d.sets.g1.boundary_point(testing::vec({1, 0.3, -0.2, 0.1}), 2.5);
  const MpcProblem p0 = build_outer_problem(d.aug, d.sets, d.budget, 0, x0, zeros(n, 1), nullptr, {});
  const MpcResult r0 = solve_mpc(p0);
  ASSERT_TRUE(r0.solution.optimal());
  const Vector x1 = r0.plan.states[1];
  const MpcProblem p1 =
      build_outer_problem(d.aug, d.sets, d.budget, 1, x1, zeros(n, 1), &r0.plan, {});
  const Vector z = outer_shift_candidate(p1, r0.plan, d.gains);
  EXPECT_LE(max_violation(p1.qp, z), 1e-6);
  const MpcResult r1 = solve_mpc(p1, z);
  ASSERT_TRUE(r1.solution.optimal());
  EXPECT_LE(r1.solution.objective, p1.qp.objective(z) + 1e-6);
}

TEST(MpcEngine, InnerShiftCandidateIsFeasible) {
  const ControllerDesign& d = sys_a_design();
  const int n = d.params.horizon;
  const std::vector<Vector> xf = zeros(n, 2);
  const std::vector<Vector> vd = zeros(n, 1);
  const Vector xt0 = d.sets.g2.boundary_point(testing::vec({1, -0.4}), 2.0);
  const MpcProblem p0 = build_inner_problem(d.model, d.sets, d.budget, 0, xt0, xf, vd, nullptr, {});
  const MpcResult r0 = solve_mpc(p0);
  ASSERT_TRUE(r0.solution.optimal());
  const MpcProblem p1 =
      build_inner_problem(d.model, d.sets, d.budget, 1, r0.plan.states[1], xf, vd, &r0.plan, {});
  const Vector z = inner_shift_candidate(p1, r0.plan, d.gains, xf, vd);
  EXPECT_LE(max_violation(p1.qp, z), 1e-6);
}

TEST(MpcEngine, StackInputsRoundTrip) {
  const std::vector<Vector> in = {testing::vec({1, 2}), testing::vec({3, 4})};
  const Vector z = stack_inputs(in);
  EXPECT_EQ(z, testing::vec({1, 2, 3, 4}));
}

}  // namespace
}  // namespace hmpc
