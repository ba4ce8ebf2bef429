#pragma once

#include <string>

#include "hmpc/contractive_sets.h"
#include "hmpc/lti_model.h"

namespace hmpc {

/// Per-index 2-norm variation bounds for consecutive MPC trajectories.
struct RateBudget {
  double eps_vtilde_max = 0.0;
  double eps_xf_max = 0.0;
  double delta_u_max = 0.0;
  double delta_vdes_max = 0.0;
  double beta = 0.0;
  int horizon = 0;
  int n1_star = 0;
  int n2_star = 0;
  /// Margins between lambda*G and the complement of G.
  double delta1 = 0.0;
  double delta2 = 0.0;
};

/// Budgets chained from the set margins:
///   eps_v  = D1 / sum |A1aug^j B1aug|
///   eps_xf = min(D2, split * eps_v / |C|)
///   du     = (eps_v - |C| eps_xf) / (|C| sum |A2^j B2|)
///   dvdes  = eps_xf / sum |Af^j Bf|
RateBudget derive_budgets(const CascadeModel& m, const AugmentedOuterModel& aug,
                          const SetPairCertificate& sets, int horizon, double beta,
                          double split = 0.5);

struct ConvergenceHorizons {
  int n1_star = 0;
  int n2_star = 0;
  double q_lump = 0.0;
  double p_lump = 0.0;
  /// Which reading of the outer lumped constant was used.
  std::string outer_reading;
};

/// Smallest integer k >= 0 with beta^k <= margin / (lump * horizon).
int horizon_from_margin(double margin, double lump, int horizon, double beta);

/// Outer lump uses the v_des channel through Bfaug:
///   Q = sum|A1aug^j B1aug| eps_v + sum|A1aug^j Bfaug| dvdes,
///   P = sum|A2^j B2| du + eps_xf.
ConvergenceHorizons convergence_horizons(const RateBudget& budget, const SetPairCertificate& sets,
                                         const CascadeModel& m, const AugmentedOuterModel& aug);

/// Radius of the rate ball at step k: delta * beta^min(k, n_star).
double rate_radius(double delta, double beta, int k, int n_star);

}  // namespace hmpc
