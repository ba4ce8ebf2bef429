#include "hmpc/terminal_synthesis.h"

#include <cmath>

#include "hmpc/errors.h"

namespace hmpc {
namespace {

constexpr double kMatchingResidual = 1e-10;

Matrix weight_or_identity(const Matrix& w, Eigen::Index n) {
  return w.size() == 0 ? Matrix::Identity(n, n) : w;
}

Matrix rows_of(const Matrix& m, const std::vector<int>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

void require_assumptions(const CascadeModel& m, std::initializer_list<int> ids) {
  const AssumptionReport report = validate_assumptions(m);
  if (const AssumptionCheck* bad = report.first_failure(ids)) {
    throw AssumptionError(bad->id, bad->witness);
  }
}

}  // namespace

std::string to_string(MatchingMode mode) {
  return mode == MatchingMode::kExact ? "exact" : "inexact";
}

MatchingMode matching_mode_from_string(const std::string& s) {
  if (s == "exact") return MatchingMode::kExact;
  if (s == "inexact") return MatchingMode::kInexact;
  throw ParameterError("unknown matching mode '" + s + "'");
}

GainDesignSpec GainDesignSpec::lqr(Matrix state_weight, Matrix input_weight) {
  GainDesignSpec spec;
  spec.method = Method::kLqr;
  spec.state_weight = std::move(state_weight);
  spec.input_weight = std::move(input_weight);
  return spec;
}

GainDesignSpec GainDesignSpec::placement(ComplexVector poles) {
  GainDesignSpec spec;
  spec.method = Method::kPolePlacement;
  spec.poles = std::move(poles);
  return spec;
}

Matrix design_state_feedback(const Matrix& a, const Matrix& b, const GainDesignSpec& spec) {
  Matrix k;
  if (spec.method == GainDesignSpec::Method::kPolePlacement) {
    k = place_poles(a, b, spec.poles);
  } else {
    k = lqr_gain(a, b, weight_or_identity(spec.state_weight, a.rows()),
                 weight_or_identity(spec.input_weight, b.cols()));
  }
  const auto dominant = dominant_eigenvalue(a - b * k);
  if (std::abs(dominant) >= 1.0) {
    throw InstabilityError(dominant, "state-feedback design did not stabilize the pair");
  }
  return k;
}

Matrix design_outer_gain(const AugmentedOuterModel& aug, const GainDesignSpec& spec) {
  return design_state_feedback(aug.a1aug, aug.bfaug, spec);
}

MatchingGains design_exact_matching(const CascadeModel& m) {
  require_assumptions(m, {2, 3, 6, 7});
  const std::vector<int> rows = full_rows(m.b2());
  const Matrix b2r = rows_of(m.b2(), rows);
  const auto solver = b2r.completeOrthogonalDecomposition();
  MatchingGains g;
  g.k21 = solver.solve(rows_of(m.bf(), rows));
  g.k22 = solver.solve(rows_of(m.a2() - m.af(), rows));

  const Matrix r21 = m.b2() * g.k21 - m.bf();
  const Matrix r22 = m.b2() * g.k22 - (m.a2() - m.af());
  for (Eigen::Index i = 0; i < m.n2(); ++i) {
    if (r21.row(i).cwiseAbs().maxCoeff() > kMatchingResidual) {
      throw AssumptionError(7, "row " + std::to_string(i + 1) + " of B2*K21 = Bf is unsolvable");
    }
    if (r22.row(i).cwiseAbs().maxCoeff() > kMatchingResidual) {
      throw AssumptionError(6,
                            "row " + std::to_string(i + 1) + " of B2*K22 = A2 - Af is unsolvable");
    }
  }
  return g;
}

Matrix outer_closed_loop(const AugmentedOuterModel& aug, const Matrix& k1) {
  return aug.a1aug - aug.bfaug * k1;
}

Matrix inner_closed_loop(const CascadeModel& m, const Matrix& k22) { return m.a2() - m.b2() * k22; }

std::vector<Channel> inner_channels(const CascadeModel& m, const MatchingGains& g) {
  return {{"vdes", m.b2() * g.k21 - m.bf()}, {"xf", m.a2() - m.af() - m.b2() * g.k22}};
}

InterconnectionGains interconnection_gains(const CascadeModel& m, const AugmentedOuterModel& aug,
                                           const Matrix& k1, const MatchingGains& inner,
                                           double tol) {
  InterconnectionGains out;
  out.gamma1 = l2_gain(outer_closed_loop(aug, k1), aug.b1aug, -k1, tol, "vtilde", "vdes");

  // Composite state [x~; xf] driven by v_des, observed through v~ = C x~.
  const int n2 = m.n2();
  const auto ch = inner_channels(m, inner);
  Matrix a = Matrix::Zero(2 * n2, 2 * n2);
  a.topLeftCorner(n2, n2) = inner_closed_loop(m, inner.k22);
  a.topRightCorner(n2, n2) = ch[1].e;
  a.bottomRightCorner(n2, n2) = m.af();
  Matrix b(2 * n2, m.q());
  b << ch[0].e, m.bf();
  Matrix c = Matrix::Zero(m.q(), 2 * n2);
  c.leftCols(n2) = m.c();
  out.gamma2 = l2_gain(a, b, c, tol, "vdes", "vtilde");
  return out;
}

TerminalGainSet evaluate_inexact_gains(const CascadeModel& m, const AugmentedOuterModel& aug,
                                       const Matrix& k1, const MatchingGains& inner) {
  const auto dominant = dominant_eigenvalue(inner_closed_loop(m, inner.k22));
  if (std::abs(dominant) >= 1.0) {
    throw InstabilityError(dominant, "inner terminal gain K22 is not stabilizing");
  }
  TerminalGainSet set;
  set.k1 = k1;
  set.k21 = inner.k21;
  set.k22 = inner.k22;
  set.mode = MatchingMode::kInexact;
  auto gains = interconnection_gains(m, aug, k1, inner);
  set.gamma1 = std::move(gains.gamma1);
  set.gamma2 = std::move(gains.gamma2);
  set.k21_residual = (m.b2() * inner.k21 - m.bf()).norm();
  set.small_gain_ok = small_gain_check(set.gamma1, set.gamma2);
  return set;
}

TerminalGainSet design_inexact_matching(const CascadeModel& m, const AugmentedOuterModel& aug,
                                        const Matrix& k1, const GainDesignSpec& spec) {
  require_assumptions(m, {1, 2, 3, 4, 5});
  MatchingGains inner;
  inner.k22 = design_state_feedback(m.a2(), m.b2(), spec);
  inner.k21 = m.b2().completeOrthogonalDecomposition().solve(m.bf());
  TerminalGainSet set = evaluate_inexact_gains(m, aug, k1, inner);
  if (!set.small_gain_ok) throw SmallGainError(set.gamma1.gamma, set.gamma2.gamma);
  return set;
}

TerminalGainSet synthesize_terminal_gains(const CascadeModel& m, MatchingMode mode,
                                          const GainDesignSpec& outer_spec,
                                          const GainDesignSpec& inner_spec) {
  const AugmentedOuterModel aug = augment(m);
  require_assumptions(m, {1, 4, 5});
  const Matrix k1 = design_outer_gain(aug, outer_spec);
  if (mode == MatchingMode::kInexact) return design_inexact_matching(m, aug, k1, inner_spec);

  const MatchingGains inner = design_exact_matching(m);
  TerminalGainSet set;
  set.k1 = k1;
  set.k21 = inner.k21;
  set.k22 = inner.k22;
  set.mode = MatchingMode::kExact;
  auto gains = interconnection_gains(m, aug, k1, inner);
  set.gamma1 = std::move(gains.gamma1);
  set.gamma2 = std::move(gains.gamma2);
  set.k21_residual = (m.b2() * inner.k21 - m.bf()).norm();
  set.small_gain_ok = small_gain_check(set.gamma1, set.gamma2);
  return set;
}

TerminalAction terminal_action(const TerminalGainSet& gains, const StateBundle& s) {
  TerminalAction act;
  act.vdes = -gains.k1 * s.x1aug();
  act.u = gains.k21 * act.vdes - gains.k22 * s.x2;
  return act;
}

}  // namespace hmpc
