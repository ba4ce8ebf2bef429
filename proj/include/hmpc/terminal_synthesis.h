#pragma once

#include <string>

#include "hmpc/certificates.h"
#include "hmpc/lti_model.h"

namespace hmpc {

enum class MatchingMode { kExact, kInexact };

std::string to_string(MatchingMode mode);
MatchingMode matching_mode_from_string(const std::string& s);

/// How a static state-feedback gain is chosen. LQR weights default to identity
/// when left empty; pole placement is single-input only.
struct GainDesignSpec {
  enum class Method { kLqr, kPolePlacement };
  Method method = Method::kLqr;
  Matrix state_weight;
  Matrix input_weight;
  ComplexVector poles;

  static GainDesignSpec lqr(Matrix state_weight = {}, Matrix input_weight = {});
  static GainDesignSpec placement(ComplexVector poles);
};

/// Terminal laws v_des = -K1 x1aug and u = K21 v_des - K22 x2.
struct TerminalGainSet {
  Matrix k1;
  Matrix k21;
  Matrix k22;
  MatchingMode mode = MatchingMode::kExact;
  /// v~ -> v_des through the closed outer loop.
  GainEstimate gamma1;
  /// v_des -> v~ through the closed inner loop with the reference model attached.
  GainEstimate gamma2;
  /// Frobenius norm of B2 K21 - Bf.
  double k21_residual = 0.0;
  bool small_gain_ok = false;
};

Matrix design_state_feedback(const Matrix& a, const Matrix& b, const GainDesignSpec& spec);

/// K1 acting on x1aug; v_des enters through Bfaug so the closed loop is
/// A1aug - Bfaug K1.
Matrix design_outer_gain(const AugmentedOuterModel& aug, const GainDesignSpec& spec);

struct MatchingGains {
  Matrix k21;
  Matrix k22;
};

/// Row-wise solve of B2 K21 = Bf and B2 K22 = A2 - Af on the full rows of B2.
MatchingGains design_exact_matching(const CascadeModel& m);

Matrix outer_closed_loop(const AugmentedOuterModel& aug, const Matrix& k1);
Matrix inner_closed_loop(const CascadeModel& m, const Matrix& k22);
/// Disturbance channels of the closed inner loop:
///   x~+ = (A2 - B2 K22) x~ + (B2 K21 - Bf) v_des + (A2 - Af - B2 K22) xf.
std::vector<Channel> inner_channels(const CascadeModel& m, const MatchingGains& g);

struct InterconnectionGains {
  GainEstimate gamma1;
  GainEstimate gamma2;
};

InterconnectionGains interconnection_gains(const CascadeModel& m, const AugmentedOuterModel& aug,
                                           const Matrix& k1, const MatchingGains& inner,
                                           double tol = 1e-6);

/// K22 from `spec` on (A2, B2), K21 by least squares on B2 K21 = Bf, and the
/// small-gain pair. Throws SmallGainError when gamma1 * gamma2 >= 1.
TerminalGainSet design_inexact_matching(const CascadeModel& m, const AugmentedOuterModel& aug,
                                        const Matrix& k1, const GainDesignSpec& spec);

/// Same gain evaluation for caller-supplied inner gains.
TerminalGainSet evaluate_inexact_gains(const CascadeModel& m, const AugmentedOuterModel& aug,
                                       const Matrix& k1, const MatchingGains& inner);

/// Full terminal design in the requested mode.
TerminalGainSet synthesize_terminal_gains(const CascadeModel& m, MatchingMode mode,
                                          const GainDesignSpec& outer_spec,
                                          const GainDesignSpec& inner_spec);

/// u = K21 v_des - K22 x2 with v_des = -K1 x1aug.
struct TerminalAction {
  Vector vdes;
  Vector u;
};
TerminalAction terminal_action(const TerminalGainSet& gains, const StateBundle& s);

}  // namespace hmpc
