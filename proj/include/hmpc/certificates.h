#pragma once

#include <string>
#include <vector>

#include "hmpc/linalg.h"

namespace hmpc {

/// Disturbance channel w entering x+ = Acl x + E w.
struct Channel {
  std::string name;
  Matrix e;
};

struct ChannelGain {
  std::string name;
  double gamma_bar = 0.0;
};

/// Witness for V(Acl x + sum E_i w_i) - V(x) <= -alpha V(x) + sum gamma_bar_i |w_i|^2
/// with V(x) = x' M x.
struct DissipationCertificate {
  Matrix m;
  double alpha = 0.0;
  std::vector<ChannelGain> gains;
  double lambda_min = 0.0;
  double lambda_max = 0.0;

  double gamma_bar(const std::string& channel) const;
  double value(const Vector& x) const { return x.dot(m * x); }
};

/// l2-induced gain bound of the LTI channel (Acl, Bin, Cout).
struct GainEstimate {
  double gamma = 0.0;
  std::string input;
  std::string output;
  bool certified = false;
  /// Storage matrix X for the bounded-real inequality evaluated at `witness_gamma`.
  Matrix witness;
  double witness_gamma = 0.0;
};

/// Solves Acl' M Acl - M = -S.
Matrix solve_discrete_lyapunov(const Matrix& acl, const Matrix& s);

/// Constructs (alpha, gamma_bar_i) for the quadratic storage M. The decay
/// margin S = M - Acl' M Acl must be positive definite; alpha is
/// theta * lambda_min(S) / lambda_max(M) and every gamma_bar starts from the
/// completion-of-squares seed and doubles until verify_dissipation passes.
DissipationCertificate compute_dissipation(const Matrix& acl, const std::vector<Channel>& channels,
                                           const Matrix& m, double theta = 0.5);

/// Block-PSD test that implies the dissipation inequality for all x, w.
bool verify_dissipation(const DissipationCertificate& cert, const Matrix& acl,
                        const std::vector<Channel>& channels);

/// Smallest eigenvalue of the dissipation block matrix (>= -1e-9 means certified).
double dissipation_margin(const DissipationCertificate& cert, const Matrix& acl,
                          const std::vector<Channel>& channels);

/// Certified l2 gain by bisection over the bounded-real Riccati test.
GainEstimate l2_gain(const Matrix& acl, const Matrix& bin, const Matrix& cout, double tol = 1e-6,
                     std::string input = "in", std::string output = "out");

/// Re-evaluates the stored bounded-real witness.
bool recheck_gain(const GainEstimate& g, const Matrix& acl, const Matrix& bin,
                  const Matrix& cout);

bool small_gain_check(const GainEstimate& g1, const GainEstimate& g2);

}  // namespace hmpc
