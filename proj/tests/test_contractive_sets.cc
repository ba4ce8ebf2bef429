#include <gtest/gtest.h>

#include <cmath>

#include "design_fixture.h"
#include "fixtures.h"
#include "hmpc/design.h"
#include "hmpc/errors.h"

namespace hmpc {
namespace {

using testing::sys_a;

DesignParams inexact_params() {
  DesignParams p;
  p.mode = MatchingMode::kInexact;
  ComplexVector poles(2);
  poles << 0.12, 0.08;
  p.inner_spec = GainDesignSpec::placement(poles);
  return p;
}

ContractiveSet unit_ball(double lambda) {
  ContractiveSet s;
  s.m = Matrix::Identity(2, 2);
  s.level = 1.0;
  s.lambda = lambda;
  s.lambda_star = lambda * lambda;
  return s;
}

TEST(ContractiveSets, OriginAndSphereMargin) {
  const ContractiveSet s = unit_ball(0.5);
  EXPECT_TRUE(membership(s, Vector::Zero(2)));
  EXPECT_TRUE(s.contains(Vector::Zero(2), 1e-6));
  EXPECT_DOUBLE_EQ(distance_to_complement(s), 0.5);
  EXPECT_TRUE(membership_scaled(s, testing::vec({0.5, 0})));
  EXPECT_FALSE(membership_scaled(s, testing::vec({0.51, 0})));
}

TEST(ContractiveSets, CapArithmetic) {
  const SaturationCaps c = saturation_caps(2.0, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(c.x1_max, 1.0);
  EXPECT_DOUBLE_EQ(c.xtilde_max, 2.0);
  const SaturationCaps inf = saturation_caps(2.0, 0.0, 0.0);
  EXPECT_TRUE(std::isinf(inf.x1_max));
  EXPECT_TRUE(std::isinf(inf.xtilde_max));
  EXPECT_THROW(saturation_caps(0.0, 1.0, 1.0), AssumptionError);
}

TEST(ContractiveSets, CapSpheresRespectInputBox) {
  const ControllerDesign d = design_controller(sys_a(), DesignParams{});
  std::mt19937_64 rng(21);
  for (int t = 0; t < 10000; ++t) {
    StateBundle s;
    const Vector x1aug = testing::random_unit(rng, 4) * d.caps.x1_max;
    s.x1 = x1aug.head(2);
    s.xf = x1aug.tail(2);
    s.x2 = s.xf + testing::random_unit(rng, 2) * d.caps.xtilde_max;
    ASSERT_TRUE(d.model.input_box().contains(terminal_action(d.gains, s).u, 1e-12));
  }
}

TEST(ContractiveSets, ExactPipelineLevels) {
  const ControllerDesign d = design_controller(sys_a(), DesignParams{});
  const auto& q = d.certificates.outer;
  const auto& p = d.certificates.inner;
  EXPECT_GT(d.sets.g1.level, 0.0);
  EXPECT_GT(d.sets.g2.level, 0.0);
  EXPECT_NEAR(d.sets.g1.level, q.lambda_min * d.caps.x1_max * d.caps.x1_max, 1e-15);
  const double eps1 = 0.5 * q.alpha;
  const double v2 = std::min(d.caps.xtilde_max * d.caps.xtilde_max * p.lambda_min,
                             eps1 * d.sets.g1.level * p.lambda_min / q.gamma_bar("vtilde"));
  EXPECT_NEAR(d.sets.g2.level, v2, 1e-15);
  for (const auto* s : {&d.sets.g1, &d.sets.g2}) {
    EXPECT_GE(s->lambda, 0.0);
    EXPECT_LT(s->lambda, 1.0);
    EXPECT_DOUBLE_EQ(s->lambda, std::sqrt(s->lambda_star));
  }
}

TEST(ContractiveSets, VanishingCouplingSelectsCapBranch) {
  const ControllerDesign d = design_controller(sys_a(), DesignParams{});
  DissipationCertificate outer = d.certificates.outer;
  outer.gains[0].gamma_bar = 0.0;
  const SetPairCertificate s =
      build_exact_sets(outer, d.certificates.inner, d.caps, d.model.c(), 0.5 * outer.alpha);
  EXPECT_EQ(s.v2_branch, LevelBranch::kSaturationCap);
  EXPECT_DOUBLE_EQ(s.g2.level,
                   d.caps.xtilde_max * d.caps.xtilde_max * d.certificates.inner.lambda_min);
}

TEST(ContractiveSets, EpsilonRange) {
  const ControllerDesign d = design_controller(sys_a(), DesignParams{});
  const auto& c = d.certificates;
  EXPECT_THROW(build_exact_sets(c.outer, c.inner, d.caps, d.model.c(), c.outer.alpha),
               ParameterError);
  EXPECT_THROW(build_exact_sets(c.outer, c.inner, d.caps, d.model.c(), 0.0), ParameterError);
}

void expect_contraction(const ControllerDesign& d, double radius_lo, double radius_hi,
                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> scale(radius_lo, radius_hi);
  const auto& g1 = d.sets.g1;
  const auto& g2 = d.sets.g2;
  for (int t = 0; t < 10000; ++t) {
    const Vector x1aug = g1.boundary_point(testing::random_unit(rng, 4), scale(rng));
    const Vector xt = g2.boundary_point(testing::random_unit(rng, 2), scale(rng));
    const testing::Successor s = testing::terminal_successor(d, x1aug, xt);
    ASSERT_TRUE(d.model.input_box().contains(s.u, 1e-12));
    ASSERT_LE(g1.value(s.x1aug), g1.lambda_star * g1.level * (1 + 1e-12));
    ASSERT_LE(g2.value(s.xtilde), g2.lambda_star * g2.level * (1 + 1e-12));
  }
}

TEST(ContractiveSets, ExactContractionBoundaryAndInterior) {
  const ControllerDesign d = design_controller(sys_a(), DesignParams{});
  expect_contraction(d, 1.0, 1.0, 31);
  expect_contraction(d, 0.0, 1.0, 32);
}

TEST(ContractiveSets, InexactContractionBoundaryAndInterior) {
  const ControllerDesign d = design_controller(sys_a(), inexact_params());
  expect_contraction(d, 1.0, 1.0, 33);
  expect_contraction(d, 0.0, 1.0, 34);
}

TEST(ContractiveSets, MarginOracle) {
  const ControllerDesign d = design_controller(sys_a(), DesignParams{});
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto* g : {&d.sets.g1, &d.sets.g2}) {
    const Eigen::Index n = g->m.rows();
    const double delta = distance_to_complement(*g);
    for (int t = 0; t < 10000; ++t) {
      const Vector a = g->boundary_point(testing::random_unit(rng, n), g->lambda);
      const Vector x = a + testing::random_unit(rng, n) * (delta * unit(rng));
      ASSERT_LE(g->value(x), g->level * (1 + 1e-12));
      ASSERT_TRUE(g->contains(a, 1.0 + 1e-12));
    }
  }
}

TEST(ContractiveSets, InexactReducesToExactWithoutCoupling) {
  const ControllerDesign d = design_controller(sys_a(), DesignParams{});
  const auto& c = d.certificates;
  ASSERT_EQ(c.inner.gamma_bar("vdes"), 0.0);
  ASSERT_EQ(c.inner.gamma_bar("xf"), 0.0);
  const SetPairCertificate in = build_inexact_sets(c.outer, c.inner, d.caps, d.gains.k1,
                                                   d.model.c(), 0.5 * c.outer.alpha,
                                                   0.5 * c.inner.alpha);
  EXPECT_EQ(in.v1_branch, LevelBranch::kSaturationCap);
  EXPECT_DOUBLE_EQ(in.g1.level, d.sets.g1.level);
  EXPECT_DOUBLE_EQ(in.g2.level, d.sets.g2.level);
}

TEST(ContractiveSets, InflatedGainBreaksSolvability) {
  const ControllerDesign d = design_controller(sys_a(), inexact_params());
  DissipationCertificate outer = d.certificates.outer;
  outer.gains[0].gamma_bar *= 1e6;
  try {
    build_inexact_sets(outer, d.certificates.inner, d.caps, d.gains.k1, d.model.c(),
                       0.5 * outer.alpha, 0.5 * d.certificates.inner.alpha);
    FAIL() << "expected SolvabilityError";
  } catch (const SolvabilityError& e) {
    EXPECT_LT(e.lhs(), e.rhs());
  }
}

TEST(ContractiveSets, InexactFixedPointResidual) {
  const ControllerDesign d = design_controller(sys_a(), inexact_params());
  const auto& c = d.certificates;
  ASSERT_GT(c.inner.gamma_bar("xf"), 0.0);
  const LevelEquations eq = level_equations(c.outer, c.inner, d.caps, d.gains.k1, d.model.c(),
                                            0.5 * c.outer.alpha, 0.5 * c.inner.alpha);
  // Direct evaluation of the right-hand sides, independent of the solver.
  const double v1 = d.sets.g1.level;
  const double v2 = d.sets.g2.level;
  const double qmin = c.outer.lambda_min, pmin = c.inner.lambda_min;
  const double k1n = spectral_norm(d.gains.k1);
  const double rhs1 = std::min(d.caps.x1_max * d.caps.x1_max * qmin,
                               0.5 * c.inner.alpha * qmin * v2 /
                                   (k1n * k1n * c.inner.gamma_bar("vdes") + c.inner.gamma_bar("xf")));
  const double rhs2 = std::min(d.caps.xtilde_max * d.caps.xtilde_max * pmin,
                               0.5 * c.outer.alpha * pmin * v1 / c.outer.gamma_bar("vtilde"));
  EXPECT_LE(std::abs(rhs1 - v1), 1e-12 * v1);
  EXPECT_LE(std::abs(rhs2 - v2), 1e-12 * v2);
  EXPECT_LE(std::abs(eq.rhs_v1(v2) - v1), 1e-12 * v1);
  EXPECT_LE(std::abs(eq.rhs_v2(v1) - v2), 1e-12 * v2);
  EXPECT_TRUE(d.sets.solvability_ok);
  EXPECT_GE(d.sets.solvability_lhs, d.sets.solvability_rhs);
}

TEST(ContractiveSets, ShrinkingInputBoxShrinksLevels) {
  const ControllerDesign wide = design_controller(sys_a(), DesignParams{});
  const ControllerDesign narrow =
      design_controller(sys_a().with_input_box(testing::symmetric_box(1.0)), DesignParams{});
  EXPECT_LE(narrow.sets.g1.level, wide.sets.g1.level);
  EXPECT_LE(narrow.sets.g2.level, wide.sets.g2.level);
}

TEST(ContractiveSets, ScaledSetIsNested) {
  const ControllerDesign d = design_controller(sys_a(), DesignParams{});
  std::mt19937_64 rng(43);
  for (int t = 0; t < 1000; ++t) {
    const Vector x = testing::random_vector(rng, 4, 0.3);
    if (d.sets.g1.contains(x, d.sets.g1.lambda)) EXPECT_TRUE(d.sets.g1.contains(x));
  }
}

}  // namespace
}  // namespace hmpc
