#include <gtest/gtest.h>

#include "fixtures.h"
#include "hmpc/errors.h"
#include "hmpc/terminal_synthesis.h"

namespace hmpc {
namespace {

using testing::mat;
using testing::sys_a;

ComplexVector real_poles(std::initializer_list<double> p) {
  ComplexVector v(static_cast<Eigen::Index>(p.size()));
  Eigen::Index i = 0;
  for (double x : p) v(i++) = x;
  return v;
}

TEST(TerminalSynthesis, ModeStrings) {
  EXPECT_EQ(matching_mode_from_string(to_string(MatchingMode::kInexact)), MatchingMode::kInexact);
  EXPECT_THROW(matching_mode_from_string("approximate"), ParameterError);
}

TEST(TerminalSynthesis, OuterGainStabilizes) {
  const AugmentedOuterModel aug = augment(sys_a());
  const Matrix k1 = design_outer_gain(aug, GainDesignSpec::lqr());
  EXPECT_LT(spectral_radius(outer_closed_loop(aug, k1)), 1.0);
}

TEST(TerminalSynthesis, TinyWeightOnStablePlantGivesSmallGain) {
  const Matrix k = design_state_feedback(mat({{0.5, 0.1}, {0, 0.3}}), mat({{0}, {1}}),
                                         GainDesignSpec::lqr(1e-8 * Matrix::Identity(2, 2)));
  EXPECT_LT(k.norm(), 1e-6);
}

TEST(TerminalSynthesis, ScalarDeadbeat) {
  const Matrix k = design_state_feedback(mat({{2}}), mat({{1}}),
                                         GainDesignSpec::placement(real_poles({0.0})));
  EXPECT_NEAR(k(0, 0), 2.0, 1e-12);
}

TEST(TerminalSynthesis, UnstableDesignThrows) {
  EXPECT_THROW(design_state_feedback(mat({{2}}), mat({{1}}),
                                     GainDesignSpec::placement(real_poles({1.5}))),
               InstabilityError);
}

TEST(TerminalSynthesis, ExactMatchingSysA) {
  const CascadeModel m = sys_a();
  const MatchingGains g = design_exact_matching(m);
  EXPECT_NEAR(g.k21(0, 0), 0.81, 1e-12);
  EXPECT_NEAR(g.k22(0, 0), -0.07, 1e-12);
  EXPECT_NEAR(g.k22(0, 1), 0.4, 1e-12);
  EXPECT_LT((m.b2() * g.k21 - m.bf()).norm(), 1e-12);
  EXPECT_LT((m.b2() * g.k22 - (m.a2() - m.af())).norm(), 1e-12);
}

TEST(TerminalSynthesis, ReferenceEqualToActuator) {
  const CascadeModel m = sys_a().with_reference(sys_a().a2(), sys_a().b2());
  const MatchingGains g = design_exact_matching(m);
  EXPECT_NEAR(g.k21(0, 0), 1.0, 1e-12);
  EXPECT_LT(g.k22.norm(), 1e-12);
}

TEST(TerminalSynthesis, ExactMatchingNamesBadRow) {
  const CascadeModel m = sys_a().with_reference(sys_a().af(), mat({{1}, {0}}));
  try {
    design_exact_matching(m);
    FAIL() << "expected AssumptionError";
  } catch (const AssumptionError& e) {
    EXPECT_EQ(e.assumption(), 7);
  }
}

TEST(TerminalSynthesis, ExactIdentityOnRandomStates) {
  const CascadeModel m = sys_a();
  const MatchingGains g = design_exact_matching(m);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const Vector xt = testing::random_vector(rng, 2);
    const Vector xf = testing::random_vector(rng, 2);
    const Vector vdes = testing::random_vector(rng, 1);
    const Vector u = g.k21 * vdes - g.k22 * (xt + xf);
    const Vector next = error_step(m, xt, xf, u, vdes);
    EXPECT_LE((next - m.af() * xt).norm(), 1e-12 * std::max(1.0, xt.norm()));
  }
}

TEST(TerminalSynthesis, ExactModeGainsAreZeroCoupled) {
  const TerminalGainSet g = synthesize_terminal_gains(sys_a(), MatchingMode::kExact,
                                                      GainDesignSpec::lqr(), GainDesignSpec::lqr());
  EXPECT_EQ(g.gamma2.gamma, 0.0);
  EXPECT_TRUE(g.small_gain_ok);
  EXPECT_GT(g.gamma1.gamma, 0.0);
}

TEST(TerminalSynthesis, InexactEvaluationOfExactGainsReproducesZero) {
  const CascadeModel m = sys_a();
  const AugmentedOuterModel aug = augment(m);
  const Matrix k1 = design_outer_gain(aug, GainDesignSpec::lqr());
  const TerminalGainSet g = evaluate_inexact_gains(m, aug, k1, design_exact_matching(m));
  EXPECT_LE(g.gamma2.gamma, 1e-8);
  EXPECT_TRUE(g.small_gain_ok);
}

TEST(TerminalSynthesis, InexactLqrReportsProduct) {
  const CascadeModel m = sys_a();
  const AugmentedOuterModel aug = augment(m);
  const Matrix k1 = design_outer_gain(aug, GainDesignSpec::lqr());
  MatchingGains inner;
  inner.k22 = design_state_feedback(m.a2(), m.b2(), GainDesignSpec::lqr());
  inner.k21 = m.b2().completeOrthogonalDecomposition().solve(m.bf());
  const TerminalGainSet g = evaluate_inexact_gains(m, aug, k1, inner);
  EXPECT_GT(g.gamma2.gamma, 0.0);
  EXPECT_TRUE(std::isfinite(g.gamma2.gamma));
  EXPECT_EQ(g.small_gain_ok, g.gamma1.gamma * g.gamma2.gamma < 1.0);
}

TEST(TerminalSynthesis, InexactPlacementNearReferencePolesPassesSmallGain) {
  const CascadeModel m = sys_a();
  const TerminalGainSet g =
      synthesize_terminal_gains(m, MatchingMode::kInexact, GainDesignSpec::lqr(),
                                GainDesignSpec::placement(real_poles({0.12, 0.08})));
  EXPECT_TRUE(g.small_gain_ok);
  EXPECT_GT(g.gamma2.gamma, 0.0);
  EXPECT_LT(spectral_radius(inner_closed_loop(m, g.k22)), 1.0);
}

TEST(TerminalSynthesis, LeastSquaresResidualReported) {
  // Two inputs that reach only the last row, reference drives both rows of a
  // non-CCF actuator: K21 can only be a least-squares fit.
  const Matrix a2 = mat({{0.5, 0}, {0, 0.4}});
  const CascadeModel m(mat({{1}}), mat({{0.1}}), a2, mat({{0}, {1}}), mat({{1, 0}}),
                       mat({{0.3, 0}, {0, 0.2}}), mat({{0.1}, {0.5}}), testing::symmetric_box(1));
  const AugmentedOuterModel aug = augment(m);
  MatchingGains inner;
  inner.k22 = Matrix::Zero(1, 2);
  inner.k21 = m.b2().completeOrthogonalDecomposition().solve(m.bf());
  const TerminalGainSet g = evaluate_inexact_gains(m, aug, design_outer_gain(aug, GainDesignSpec::lqr()), inner);
  EXPECT_NEAR(g.k21_residual, 0.1, 1e-12);
}

TEST(TerminalSynthesis, TerminalLawsStabilizeFromSmallBall) {
  const CascadeModel m = sys_a();
  const TerminalGainSet g = synthesize_terminal_gains(m, MatchingMode::kExact,
                                                      GainDesignSpec::lqr(), GainDesignSpec::lqr());
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    StateBundle s;
    s.x1 = testing::random_vector(rng, 2, 0.01);
    s.xf = testing::random_vector(rng, 2, 0.01);
    s.x2 = s.xf + testing::random_vector(rng, 2, 0.01);
    int k = 0;
    for (; k < 500; ++k) {
      Vector e(6);
      e << s.x1aug(), s.xtilde();
      if (e.norm() <= 1e-6) break;
      const TerminalAction act = terminal_action(g, s);
      ASSERT_TRUE(m.input_box().contains(act.u));
      s = step_true(m, s, act.u, act.vdes);
    }
    EXPECT_LT(k, 500);
  }
}

}  // namespace
}  // namespace hmpc
