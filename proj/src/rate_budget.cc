#include "hmpc/rate_budget.h"

#include <algorithm>
#include <cmath>

#include "hmpc/errors.h"

namespace hmpc {

RateBudget derive_budgets(const CascadeModel& m, const AugmentedOuterModel& aug,
                          const SetPairCertificate& sets, int horizon, double beta,
                          double split) {
  if (horizon < 2) throw ParameterError("horizon N must be at least 2");
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("beta must lie in (0,1)");
  if (!(split > 0.0 && split < 1.0)) throw ParameterError("split must lie in (0,1)");

  RateBudget b;
  b.horizon = horizon;
  b.beta = beta;
  b.delta1 = distance_to_complement(sets.g1);
  b.delta2 = distance_to_complement(sets.g2);
  const double c_norm = spectral_norm(m.c());
  if (!(c_norm > 0.0)) throw DegenerateGeometryError("output matrix C is zero");

  b.eps_vtilde_max = b.delta1 / sum_power_norms(aug.a1aug, aug.b1aug, horizon);
  b.eps_xf_max = std::min(b.delta2, split * b.eps_vtilde_max / c_norm);
  b.delta_u_max = (b.eps_vtilde_max - c_norm * b.eps_xf_max) /
                  (c_norm * sum_power_norms(m.a2(), m.b2(), horizon));
  b.delta_vdes_max = b.eps_xf_max / sum_power_norms(m.af(), m.bf(), horizon);

  for (double v : {b.eps_vtilde_max, b.eps_xf_max, b.delta_u_max, b.delta_vdes_max}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw DegenerateGeometryError("rate budget collapsed to a non-positive value");
    }
  }
  return b;
}

int horizon_from_margin(double margin, double lump, int horizon, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("beta must lie in (0,1)");
  if (!(lump > 0.0)) return 0;
  const double ratio = margin / (lump * horizon);
  if (ratio >= 1.0) return 0;
  const double k = std::log(ratio) / std::log(beta);
  return std::max(0, static_cast<int>(std::ceil(k - 1e-9)));
}

ConvergenceHorizons convergence_horizons(const RateBudget& budget, const SetPairCertificate& sets,
                                         const CascadeModel& m, const AugmentedOuterModel& aug) {
  if (!(budget.beta > 0.0 && budget.beta < 1.0)) throw ParameterError("beta must lie in (0,1)");
  const int n = budget.horizon;
  ConvergenceHorizons h;
  h.q_lump = sum_power_norms(aug.a1aug, aug.b1aug, n) * budget.eps_vtilde_max +
             sum_power_norms(aug.a1aug, aug.bfaug, n) * budget.delta_vdes_max;
  h.p_lump = sum_power_norms(m.a2(), m.b2(), n) * budget.delta_u_max + budget.eps_xf_max;
  h.outer_reading = "corrected: sum|A1aug^j Bfaug| * delta_vdes_max";
  h.n1_star = horizon_from_margin(distance_to_complement(sets.g1), h.q_lump, n, budget.beta);
  h.n2_star = horizon_from_margin(distance_to_complement(sets.g2), h.p_lump, n, budget.beta);
  return h;
}

double rate_radius(double delta, double beta, int k, int n_star) {
  return delta * std::pow(beta, std::min(k, n_star));
}

}  // namespace hmpc
