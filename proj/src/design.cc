#include "hmpc/design.h"

namespace hmpc {

ControllerDesign design_controller(const CascadeModel& m, const DesignParams& params) {
  const AugmentedOuterModel aug = augment(m);
  TerminalGainSet gains =
      synthesize_terminal_gains(m, params.mode, params.outer_spec, params.inner_spec);
  LoopCertificates certs = loop_certificates(m, aug, gains, params.theta);
  ControllerDesign d{m, aug, params, std::move(gains), std::move(certs), {}, {}, {}, {}};
  rederive_sets(d);
  return d;
}

void rederive_sets(ControllerDesign& d) {
  const DesignParams& p = d.params;
  const double eps1 = p.eps1 > 0.0 ? p.eps1 : 0.5 * d.certificates.outer.alpha;
  const double eps2 = p.eps2 > 0.0 ? p.eps2 : 0.5 * d.certificates.inner.alpha;
  d.caps = saturation_caps(d.model, d.gains);
  if (d.gains.mode == MatchingMode::kExact) {
    d.sets = build_exact_sets(d.certificates.outer, d.certificates.inner, d.caps, d.model.c(), eps1);
  } else {
    d.sets = build_inexact_sets(d.certificates.outer, d.certificates.inner, d.caps, d.gains.k1,
                                d.model.c(), eps1, eps2);
  }
  d.budget = derive_budgets(d.model, d.aug, d.sets, p.horizon, p.beta, p.split);
  d.horizons = convergence_horizons(d.budget, d.sets, d.model, d.aug);
  d.budget.n1_star = d.horizons.n1_star;
  d.budget.n2_star = d.horizons.n2_star;
}

}  // namespace hmpc
