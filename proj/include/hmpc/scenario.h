#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "hmpc/closed_loop.h"
#include "hmpc/design.h"
#include "hmpc/sampling.h"

namespace hmpc {

using Json = nlohmann::json;

/// A parsed scenario file. `raw` keeps the document for hashing and embedding.
struct Scenario {
  std::string name;
  std::string description;
  Json raw;
  std::optional<CascadeModel> model;
  DesignParams params;
  StateBundle initial;
  int steps = 200;
  std::uint64_t seed = kDefaultSeed;
  /// Fault injection: multiplies every dissipation gain bound after synthesis.
  double gamma_bar_scale = 1.0;
};

Matrix matrix_from_json(const Json& j, const std::string& name);
Vector vector_from_json(const Json& j, const std::string& name);
Json to_json(const Matrix& m);
Json to_json(const Vector& v);

Scenario parse_scenario(const Json& j);
Scenario load_scenario(const std::string& path);
Json load_json(const std::string& path);
void save_json(const std::string& path, const Json& j);

/// 64-bit FNV-1a over the canonical serialization, as 16 hex digits.
std::string scenario_hash(const Json& scenario);

/// Synthesis pipeline for a scenario, including fault injection.
ControllerDesign design_from_scenario(const Scenario& s);

Json assumptions_json(const AssumptionReport& r);
Json bundle_json(const Scenario& s, const ControllerDesign& d);
Json failure_bundle(const Scenario& s, const std::string& status, const std::string& message,
                    const Json& details = Json::object());

/// Rebuilds the design from a bundle. Constants stored in the bundle take
/// precedence over re-derived ones, so hand edits are honored.
ControllerDesign design_from_bundle(const Json& bundle);
Scenario scenario_from_bundle(const Json& bundle);

Json certification_json(const CertificationReport& r);
Json sampling_json(const SamplingReport& r);

/// Flat "key = value" rendering with stable dotted key names.
std::string format_report(const Json& j);

}  // namespace hmpc
