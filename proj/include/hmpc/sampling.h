#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hmpc/design.h"

namespace hmpc {

inline constexpr std::uint64_t kDefaultSeed = 0xC0FFEE;

struct SamplingViolation {
  std::string check;
  Vector witness;
  std::string detail;
};

struct SamplingReport {
  int samples = 0;
  std::uint64_t seed = kDefaultSeed;
  /// Samples evaluated and violations found, per check.
  std::map<std::string, int> evaluated;
  std::map<std::string, int> violations;
  /// First violation of each failing check.
  std::vector<SamplingViolation> witnesses;

  bool no_samples() const { return samples == 0; }
  bool passed() const;
};

/// Monte Carlo checks of the terminal-set and budget invariants:
///   contraction  boundary of G1 x G2 maps into lambda1 G1 x lambda2 G2 with u in U
///   margin       lambda G plus any perturbation of norm Delta stays in G
///   outer_chain  v~ perturbations within eps_v move x1aug(N) by at most Delta1
///   inner_chain  u and xf perturbations within budget move v~ by at most eps_v
///   ref_chain    v_des perturbations within budget move xf(N) by at most eps_xf
SamplingReport run_sampling_checks(const ControllerDesign& d, int samples,
                                   std::uint64_t seed = kDefaultSeed);

}  // namespace hmpc
