#pragma once

#include <string>

#include "hmpc/certificates.h"
#include "hmpc/lti_model.h"
#include "hmpc/terminal_synthesis.h"

namespace hmpc {

/// Closed ellipsoid {x : x' M x <= level} with contraction factor lambda,
/// where lambda = sqrt(lambda_star) so that V(x) <= lambda_star * level is the
/// same set as lambda * G.
struct ContractiveSet {
  Matrix m;
  double level = 0.0;
  double lambda = 0.0;
  double lambda_star = 0.0;
  double epsilon = 0.0;

  double value(const Vector& x) const { return x.dot(m * x); }
  /// Membership in scale * G.
  bool contains(const Vector& x, double scale = 1.0) const;
  /// Boundary point of scale * G in the direction of `dir`.
  Vector boundary_point(const Vector& dir, double scale = 1.0) const;
};

bool membership(const ContractiveSet& set, const Vector& x);
bool membership_scaled(const ContractiveSet& set, const Vector& x);

/// Lower bound on the 2-norm distance from the boundary of lambda * G to the
/// complement of G: (1 - lambda) * sqrt(level / lambda_max(M)).
double distance_to_complement(const ContractiveSet& set);

/// Certificates for both closed terminal loops, with the channel data they
/// were computed against.
struct LoopCertificates {
  Matrix outer_acl;
  std::vector<Channel> outer_channels;
  DissipationCertificate outer;
  Matrix inner_acl;
  std::vector<Channel> inner_channels;
  DissipationCertificate inner;
};

/// Lyapunov storage with S = I for each closed loop, then dissipation
/// constants. Exact mode uses zero inner channels (x~+ = Af x~).
LoopCertificates loop_certificates(const CascadeModel& m, const AugmentedOuterModel& aug,
                                   const TerminalGainSet& gains, double theta = 0.5);

struct SaturationCaps {
  double radius = 0.0;
  double x1_max = 0.0;
  double xtilde_max = 0.0;
};

/// Splits the inscribed input radius r equally between the x1aug and x~
/// terms of |u_t| <= (|K21 K1| + |K22|) |x1aug| + |K22| |x~|.
SaturationCaps saturation_caps(double radius, double outer_coeff, double inner_coeff);
SaturationCaps saturation_caps(const CascadeModel& m, const TerminalGainSet& gains);

enum class LevelBranch { kSaturationCap, kCoupling };
std::string to_string(LevelBranch b);

struct SetPairCertificate {
  ContractiveSet g1;
  ContractiveSet g2;
  double x1_max = 0.0;
  double xtilde_max = 0.0;
  MatchingMode mode = MatchingMode::kExact;
  bool solvability_ok = true;
  double solvability_lhs = 0.0;
  double solvability_rhs = 0.0;
  /// Active min-branch of the V1* and V2* level expressions.
  LevelBranch v1_branch = LevelBranch::kSaturationCap;
  LevelBranch v2_branch = LevelBranch::kSaturationCap;
  int fixed_point_iterations = 0;
};

/// Coefficients of the coupled level equations
///   V1 = min(a1, b1 V2),   V2 = min(a2, b2 V1)
/// with b = +inf when the coupling constant vanishes.
struct LevelEquations {
  double a1 = 0.0;
  double b1 = 0.0;
  double a2 = 0.0;
  double b2 = 0.0;

  double rhs_v1(double v2) const;
  double rhs_v2(double v1) const;
};

LevelEquations level_equations(const DissipationCertificate& outer,
                               const DissipationCertificate& inner, const SaturationCaps& caps,
                               const Matrix& k1, const Matrix& c, double eps1, double eps2);

SetPairCertificate build_exact_sets(const DissipationCertificate& outer,
                                    const DissipationCertificate& inner,
                                    const SaturationCaps& caps, const Matrix& c, double eps1);

/// Throws SolvabilityError when eps1 eps2 lmin(P) lmin(Q) < gamma1 |C|^2 (gamma21 |K1|^2 + gamma22).
SetPairCertificate build_inexact_sets(const DissipationCertificate& outer,
                                      const DissipationCertificate& inner,
                                      const SaturationCaps& caps, const Matrix& k1, const Matrix& c,
                                      double eps1, double eps2);

}  // namespace hmpc
