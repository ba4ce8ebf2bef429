#pragma once

#include "hmpc/contractive_sets.h"
#include "hmpc/mpc_engine.h"
#include "hmpc/rate_budget.h"
#include "hmpc/terminal_synthesis.h"

namespace hmpc {

/// Tunable design parameters. Non-positive eps1/eps2 select alpha/2.
struct DesignParams {
  MatchingMode mode = MatchingMode::kExact;
  GainDesignSpec outer_spec = GainDesignSpec::lqr();
  GainDesignSpec inner_spec = GainDesignSpec::lqr();
  double theta = 0.5;
  double eps1 = 0.0;
  double eps2 = 0.0;
  double split = 0.5;
  int horizon = 10;
  double beta = 0.9;
  StageWeights outer_weights;
  StageWeights inner_weights;
};

/// Everything the controllers need, derived in dependency order:
/// gains, certificates, sets, budgets, horizons.
struct ControllerDesign {
  CascadeModel model;
  AugmentedOuterModel aug;
  DesignParams params;
  TerminalGainSet gains;
  LoopCertificates certificates;
  SaturationCaps caps;
  SetPairCertificate sets;
  RateBudget budget;
  ConvergenceHorizons horizons;
};

ControllerDesign design_controller(const CascadeModel& m, const DesignParams& params);

/// Re-derives sets, budgets and horizons after the caller edited gains or
/// certificates by hand.
void rederive_sets(ControllerDesign& d);

}  // namespace hmpc
