#include "hmpc/contractive_sets.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hmpc/errors.h"

namespace hmpc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : kInf; }

ContractiveSet make_set(const DissipationCertificate& cert, double level, double lambda_star,
                        double eps) {
  ContractiveSet s;
  s.m = cert.m;
  s.level = level;
  s.lambda_star = lambda_star;
  s.lambda = std::sqrt(lambda_star);
  s.epsilon = eps;
  return s;
}

}  // namespace

bool ContractiveSet::contains(const Vector& x, double scale) const {
  return value(x) <= scale * scale * level;
}

Vector ContractiveSet::boundary_point(const Vector& dir, double scale) const {
  const double v = value(dir);
  if (v <= 0.0) return Vector::Zero(dir.size());
  return dir * (scale * std::sqrt(level / v));
}

bool membership(const ContractiveSet& set, const Vector& x) { return set.contains(x); }

bool membership_scaled(const ContractiveSet& set, const Vector& x) {
  return set.contains(x, set.lambda);
}

double distance_to_complement(const ContractiveSet& set) {
  return (1.0 - set.lambda) * std::sqrt(set.level / max_eigenvalue_sym(set.m));
}

LoopCertificates loop_certificates(const CascadeModel& m, const AugmentedOuterModel& aug,
                                   const TerminalGainSet& gains, double theta) {
  LoopCertificates lc;
  lc.outer_acl = outer_closed_loop(aug, gains.k1);
  lc.outer_channels = {{"vtilde", aug.b1aug}};
  const Matrix q = solve_discrete_lyapunov(
      lc.outer_acl, Matrix::Identity(lc.outer_acl.rows(), lc.outer_acl.cols()));
  lc.outer = compute_dissipation(lc.outer_acl, lc.outer_channels, q, theta);

  const int n2 = m.n2();
  if (gains.mode == MatchingMode::kExact) {
    lc.inner_acl = m.af();
    lc.inner_channels = {{"vdes", Matrix::Zero(n2, m.q())}, {"xf", Matrix::Zero(n2, n2)}};
  } else {
    lc.inner_acl = inner_closed_loop(m, gains.k22);
    lc.inner_channels = inner_channels(m, {gains.k21, gains.k22});
  }
  const Matrix p = solve_discrete_lyapunov(lc.inner_acl, Matrix::Identity(n2, n2));
  lc.inner = compute_dissipation(lc.inner_acl, lc.inner_channels, p, theta);
  return lc;
}

SaturationCaps saturation_caps(double radius, double outer_coeff, double inner_coeff) {
  if (!(radius > 0.0)) throw AssumptionError(8, "origin is not interior to the input box");
  SaturationCaps caps;
  caps.radius = radius;
  caps.x1_max = safe_ratio(0.5 * radius, outer_coeff);
  caps.xtilde_max = safe_ratio(0.5 * radius, inner_coeff);
  return caps;
}

SaturationCaps saturation_caps(const CascadeModel& m, const TerminalGainSet& gains) {
  const double k22 = spectral_norm(gains.k22);
  return saturation_caps(m.input_box().inscribed_radius(),
                         spectral_norm(gains.k21 * gains.k1) + k22, k22);
}

std::string to_string(LevelBranch b) {
  return b == LevelBranch::kSaturationCap ? "saturation_cap" : "coupling";
}

double LevelEquations::rhs_v1(double v2) const {
  return std::isinf(b1) ? a1 : std::min(a1, b1 * v2);
}

double LevelEquations::rhs_v2(double v1) const {
  return std::isinf(b2) ? a2 : std::min(a2, b2 * v1);
}

LevelEquations level_equations(const DissipationCertificate& outer,
                               const DissipationCertificate& inner, const SaturationCaps& caps,
                               const Matrix& k1, const Matrix& c, double eps1, double eps2) {
  const double qmin = outer.lambda_min;
  const double pmin = inner.lambda_min;
  const double c2 = std::pow(spectral_norm(c), 2);
  const double k2 = std::pow(spectral_norm(k1), 2);
  const double coupling1 = k2 * inner.gamma_bar("vdes") + inner.gamma_bar("xf");
  LevelEquations eq;
  eq.a1 = caps.x1_max * caps.x1_max * qmin;
  eq.b1 = safe_ratio(eps2 * qmin, coupling1);
  eq.a2 = caps.xtilde_max * caps.xtilde_max * pmin;
  eq.b2 = safe_ratio(eps1 * pmin, c2 * outer.gamma_bar("vtilde"));
  return eq;
}

SetPairCertificate build_exact_sets(const DissipationCertificate& outer,
                                    const DissipationCertificate& inner,
                                    const SaturationCaps& caps, const Matrix& c, double eps1) {
  const double alpha1 = outer.alpha;
  if (!(eps1 > 0.0 && eps1 < alpha1)) {
    throw ParameterError("eps1 must lie in (0, alpha1)");
  }
  const double qmin = outer.lambda_min;
  const double pmin = inner.lambda_min;
  const double c2 = std::pow(spectral_norm(c), 2);
  const double v1 = qmin * caps.x1_max * caps.x1_max;
  const double cap_branch = caps.xtilde_max * caps.xtilde_max * pmin;
  const double coupling_branch = safe_ratio(eps1 * v1 * pmin, outer.gamma_bar("vtilde") * c2);

  SetPairCertificate out;
  out.mode = MatchingMode::kExact;
  out.x1_max = caps.x1_max;
  out.xtilde_max = caps.xtilde_max;
  out.v1_branch = LevelBranch::kSaturationCap;
  out.v2_branch =
      coupling_branch < cap_branch ? LevelBranch::kCoupling : LevelBranch::kSaturationCap;
  const double v2 = std::min(cap_branch, coupling_branch);
  if (!(v1 > 0.0 && v2 > 0.0) || std::isinf(v1) || std::isinf(v2)) {
    throw DegenerateGeometryError("terminal levels must be finite and positive");
  }
  out.g1 = make_set(outer, v1, 1.0 - alpha1 + eps1, eps1);
  out.g2 = make_set(inner, v2, 1.0 - inner.alpha, 0.0);
  return out;
}

SetPairCertificate build_inexact_sets(const DissipationCertificate& outer,
                                      const DissipationCertificate& inner,
                                      const SaturationCaps& caps, const Matrix& k1, const Matrix& c,
                                      double eps1, double eps2) {
  if (!(eps1 > 0.0 && eps1 < outer.alpha)) throw ParameterError("eps1 must lie in (0, alpha1)");
  if (!(eps2 > 0.0 && eps2 < inner.alpha)) throw ParameterError("eps2 must lie in (0, alpha2)");

  SetPairCertificate out;
  out.mode = MatchingMode::kInexact;
  out.x1_max = caps.x1_max;
  out.xtilde_max = caps.xtilde_max;
  const double c2 = std::pow(spectral_norm(c), 2);
  const double k2 = std::pow(spectral_norm(k1), 2);
  out.solvability_lhs = eps1 * eps2 * inner.lambda_min * outer.lambda_min;
  out.solvability_rhs = outer.gamma_bar("vtilde") * c2 *
                        (inner.gamma_bar("vdes") * k2 + inner.gamma_bar("xf"));
  out.solvability_ok = out.solvability_lhs >= out.solvability_rhs;
  if (!out.solvability_ok) throw SolvabilityError(out.solvability_lhs, out.solvability_rhs);

  const LevelEquations eq = level_equations(outer, inner, caps, k1, c, eps1, eps2);
  // Monotone, piecewise-linear map: settles two sweeps after the first branch switch.
  double v1 = eq.a1;
  double v2 = eq.rhs_v2(v1);
  int iterations = 0;
  for (; iterations < 100; ++iterations) {
    const double v1_next = eq.rhs_v1(v2);
    const double v2_next = eq.rhs_v2(v1_next);
    const bool settled = v1_next == v1 && v2_next == v2;
    v1 = v1_next;
    v2 = v2_next;
    if (settled) break;
  }
  out.fixed_point_iterations = iterations + 1;
  if (!(v1 > 0.0 && v2 > 0.0) || std::isinf(v1) || std::isinf(v2)) {
    throw DegenerateGeometryError("terminal levels must be finite and positive");
  }
  out.v1_branch = (!std::isinf(eq.b1) && eq.b1 * v2 < eq.a1) ? LevelBranch::kCoupling
                                                              : LevelBranch::kSaturationCap;
  out.v2_branch = (!std::isinf(eq.b2) && eq.b2 * v1 < eq.a2) ? LevelBranch::kCoupling
                                                              : LevelBranch::kSaturationCap;
  out.g1 = make_set(outer, v1, 1.0 - outer.alpha + eps1, eps1);
  out.g2 = make_set(inner, v2, 1.0 - inner.alpha + eps2, eps2);
  return out;
}

}  // namespace hmpc
