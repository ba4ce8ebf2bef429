#include "hmpc/scenario.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hmpc/errors.h"

namespace hmpc {
namespace {

const Json& require(const Json& j, const std::string& key) {
  if (!j.contains(key)) throw ParameterError("missing field '" + key + "'");
  return j.at(key);
}

GainDesignSpec gain_spec_from_json(const Json& j) {
  const std::string method = j.value("method", "lqr");
  if (method == "lqr") {
    Matrix q, r;
    if (j.contains("state_weight")) q = matrix_from_json(j.at("state_weight"), "state_weight");
    if (j.contains("input_weight")) r = matrix_from_json(j.at("input_weight"), "input_weight");
    return GainDesignSpec::lqr(q, r);
  }
  if (method == "placement") {
    const Json& poles = require(j, "poles");
    ComplexVector p(static_cast<Eigen::Index>(poles.size()));
    for (std::size_t i = 0; i < poles.size(); ++i) {
      const Json& e = poles[i];
      p(static_cast<Eigen::Index>(i)) = e.is_array() ? std::complex<double>(e.at(0), e.at(1))
                                                     : std::complex<double>(e.get<double>(), 0.0);
    }
    return GainDesignSpec::placement(p);
  }
  throw ParameterError("unknown gain design method '" + method + "'");
}

StageWeights weights_from_json(const Json& j) {
  StageWeights w;
  if (j.contains("state")) w.state = matrix_from_json(j.at("state"), "state");
  if (j.contains("input")) w.input = matrix_from_json(j.at("input"), "input");
  return w;
}

Json cert_json(const DissipationCertificate& c) {
  Json gains = Json::object();
  for (const auto& g : c.gains) gains[g.name] = g.gamma_bar;
  return {{"M", to_json(c.m)},
          {"alpha", c.alpha},
          {"gamma_bar", gains},
          {"lambda_min", c.lambda_min},
          {"lambda_max", c.lambda_max}};
}

void cert_from_json(const Json& j, DissipationCertificate& c) {
  c.m = matrix_from_json(j.at("M"), "M");
  c.alpha = j.at("alpha");
  c.lambda_min = j.at("lambda_min");
  c.lambda_max = j.at("lambda_max");
  for (auto& g : c.gains) g.gamma_bar = j.at("gamma_bar").at(g.name);
}

Json set_json(const ContractiveSet& s) {
  return {{"level", s.level},
          {"lambda", s.lambda},
          {"lambda_star", s.lambda_star},
          {"epsilon", s.epsilon}};
}

void set_from_json(const Json& j, ContractiveSet& s) {
  s.level = j.at("level");
  s.lambda = j.at("lambda");
  s.lambda_star = j.at("lambda_star");
  s.epsilon = j.at("epsilon");
}

Json gain_estimate_json(const GainEstimate& g) {
  return {{"gamma", g.gamma}, {"input", g.input}, {"output", g.output}, {"certified", g.certified}};
}

Json verdict_json(const Verdict& v) {
  return {{"passed", v.passed}, {"detail", v.detail}, {"steps", v.steps}};
}

void flatten(const Json& j, const std::string& prefix, std::ostringstream& os) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), os);
    }
    return;
  }
  const bool scalar_array =
      j.is_array() && std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
  if (j.is_array() && !scalar_array) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      flatten(j[i], prefix + "[" + std::to_string(i) + "]", os);
    }
    return;
  }
  os << prefix << " = " << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
}

}  // namespace

Matrix matrix_from_json(const Json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) throw StructuralError(name, "expected a non-empty array of rows");
  if (!j.front().is_array()) {
    // A flat array is a single row.
    Matrix m(1, static_cast<Eigen::Index>(j.size()));
    for (std::size_t c = 0; c < j.size(); ++c) m(0, static_cast<Eigen::Index>(c)) = j[c].get<double>();
    return m;
  }
  const std::size_t cols = j.front().size();
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw StructuralError(name, "ragged rows");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

Vector vector_from_json(const Json& j, const std::string& name) {
  if (!j.is_array()) throw StructuralError(name, "expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Scenario parse_scenario(const Json& j) {
  Scenario s;
  s.raw = j;
  s.name = j.value("name", "");
  s.description = j.value("description", "");
  const Json& model = require(j, "model");
  InputBox box{vector_from_json(require(model, "u_min"), "u_min"),
               vector_from_json(require(model, "u_max"), "u_max")};
  s.model.emplace(matrix_from_json(require(model, "A1"), "A1"),
                  matrix_from_json(require(model, "B1"), "B1"),
                  matrix_from_json(require(model, "A2"), "A2"),
                  matrix_from_json(require(model, "B2"), "B2"),
                  matrix_from_json(require(model, "C"), "C"),
                  matrix_from_json(require(model, "Af"), "Af"),
                  matrix_from_json(require(model, "Bf"), "Bf"), box);

  const Json design = j.value("design", Json::object());
  DesignParams& p = s.params;
  p.mode = matching_mode_from_string(design.value("mode", "exact"));
  if (design.contains("outer_gain")) p.outer_spec = gain_spec_from_json(design.at("outer_gain"));
  if (design.contains("inner_gain")) p.inner_spec = gain_spec_from_json(design.at("inner_gain"));
  p.theta = design.value("theta", p.theta);
  p.eps1 = design.value("eps1", p.eps1);
  p.eps2 = design.value("eps2", p.eps2);
  p.split = design.value("split", p.split);
  p.horizon = design.value("horizon", p.horizon);
  p.beta = design.value("beta", p.beta);
  if (design.contains("outer_weights")) p.outer_weights = weights_from_json(design.at("outer_weights"));
  if (design.contains("inner_weights")) p.inner_weights = weights_from_json(design.at("inner_weights"));

  s.initial = StateBundle::zero(*s.model);
  const Json run = j.value("run", Json::object());
  if (run.contains("x1")) s.initial.x1 = vector_from_json(run.at("x1"), "x1");
  if (run.contains("x2")) s.initial.x2 = vector_from_json(run.at("x2"), "x2");
  if (run.contains("xf")) s.initial.xf = vector_from_json(run.at("xf"), "xf");
  if (s.initial.x1.size() != s.model->n1()) throw StructuralError("x1", "wrong length");
  if (s.initial.x2.size() != s.model->n2()) throw StructuralError("x2", "wrong length");
  if (s.initial.xf.size() != s.model->n2()) throw StructuralError("xf", "wrong length");
  s.steps = run.value("steps", s.steps);
  s.seed = run.value("seed", s.seed);

  const Json faults = j.value("fault_injection", Json::object());
  s.gamma_bar_scale = faults.value("gamma_bar_scale", 1.0);
  return s;
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open " + path);
  return Json::parse(in);
}

void save_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write " + path);
  out << j.dump(2) << "\n";
}

Scenario load_scenario(const std::string& path) { return parse_scenario(load_json(path)); }

std::string scenario_hash(const Json& scenario) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : scenario.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ControllerDesign design_from_scenario(const Scenario& s) {
  if (s.gamma_bar_scale == 1.0) return design_controller(*s.model, s.params);
  if (!(s.gamma_bar_scale >= 1.0)) {
    throw ParameterError("gamma_bar_scale must be >= 1 (larger bounds stay certified)");
  }
  const AugmentedOuterModel aug = augment(*s.model);
  TerminalGainSet gains = synthesize_terminal_gains(*s.model, s.params.mode, s.params.outer_spec,
                                                    s.params.inner_spec);
  LoopCertificates certs = loop_certificates(*s.model, aug, gains, s.params.theta);
  for (auto* cert : {&certs.outer, &certs.inner}) {
    for (auto& g : cert->gains) g.gamma_bar *= s.gamma_bar_scale;
  }
  ControllerDesign d{*s.model, aug, s.params, std::move(gains), std::move(certs), {}, {}, {}, {}};
  rederive_sets(d);
  return d;
}

Json assumptions_json(const AssumptionReport& r) {
  Json a = Json::array();
  for (const auto& c : r.checks) {
    Json e = {{"id", c.id}, {"name", c.name}, {"passed", c.passed}, {"witness", c.witness}};
    if (c.row) e["row"] = *c.row;
    if (c.eigenvalue) e["eigenvalue"] = {c.eigenvalue->real(), c.eigenvalue->imag()};
    a.push_back(e);
  }
  return a;
}

Json bundle_json(const Scenario& s, const ControllerDesign& d) {
  Json b;
  b["format"] = "hmpc-bundle/1";
  b["status"] = "ok";
  b["scenario_hash"] = scenario_hash(s.raw);
  b["scenario"] = s.raw;
  b["assumptions"] = assumptions_json(validate_assumptions(d.model));
  b["gains"] = {{"mode", to_string(d.gains.mode)},
                {"K1", to_json(d.gains.k1)},
                {"K21", to_json(d.gains.k21)},
                {"K22", to_json(d.gains.k22)},
                {"gamma1", gain_estimate_json(d.gains.gamma1)},
                {"gamma2", gain_estimate_json(d.gains.gamma2)},
                {"small_gain_product", d.gains.gamma1.gamma * d.gains.gamma2.gamma},
                {"K21_residual", d.gains.k21_residual}};
  b["certificates"] = {{"outer", cert_json(d.certificates.outer)},
                       {"inner", cert_json(d.certificates.inner)}};
  b["sets"] = {{"G1", set_json(d.sets.g1)},
               {"G2", set_json(d.sets.g2)},
               {"x1_max", d.sets.x1_max},
               {"xtilde_max", d.sets.xtilde_max},
               {"input_radius", d.caps.radius},
               {"V1_branch", to_string(d.sets.v1_branch)},
               {"V2_branch", to_string(d.sets.v2_branch)},
               {"solvability",
                {{"checked", d.sets.mode == MatchingMode::kInexact},
                 {"lhs", d.sets.solvability_lhs},
                 {"rhs", d.sets.solvability_rhs},
                 {"ok", d.sets.solvability_ok}}}};
  const RateBudget& r = d.budget;
  b["budgets"] = {{"eps_vtilde_max", r.eps_vtilde_max}, {"eps_xf_max", r.eps_xf_max},
                  {"delta_u_max", r.delta_u_max},       {"delta_vdes_max", r.delta_vdes_max},
                  {"delta1", r.delta1},                 {"delta2", r.delta2},
                  {"beta", r.beta},                     {"N", r.horizon},
                  {"split", d.params.split}};
  b["horizons"] = {{"N1_star", d.horizons.n1_star},
                   {"N2_star", d.horizons.n2_star},
                   {"Q_lump", d.horizons.q_lump},
                   {"P_lump", d.horizons.p_lump},
                   {"outer_reading", d.horizons.outer_reading}};
  return b;
}

Json failure_bundle(const Scenario& s, const std::string& status, const std::string& message,
                    const Json& details) {
  Json b;
  b["format"] = "hmpc-bundle/1";
  b["status"] = status;
  b["scenario_hash"] = scenario_hash(s.raw);
  b["scenario"] = s.raw;
  b["error"] = {{"message", message}, {"details", details}};
  if (s.model) b["assumptions"] = assumptions_json(validate_assumptions(*s.model));
  return b;
}

Scenario scenario_from_bundle(const Json& bundle) {
  if (bundle.value("format", "") != "hmpc-bundle/1") throw ParameterError("not a certificate bundle");
  Scenario s = parse_scenario(bundle.at("scenario"));
  if (scenario_hash(s.raw) != bundle.value("scenario_hash", "")) {
    throw ParameterError("bundle hash does not match its embedded scenario");
  }
  return s;
}

ControllerDesign design_from_bundle(const Json& bundle) {
  if (bundle.value("status", "") != "ok") {
    throw ParameterError("bundle records a failed synthesis: " + bundle.value("status", ""));
  }
  const Scenario s = scenario_from_bundle(bundle);
  ControllerDesign d = design_from_scenario(s);
  const Json& g = bundle.at("gains");
  d.gains.k1 = matrix_from_json(g.at("K1"), "K1");
  d.gains.k21 = matrix_from_json(g.at("K21"), "K21");
  d.gains.k22 = matrix_from_json(g.at("K22"), "K22");
  cert_from_json(bundle.at("certificates").at("outer"), d.certificates.outer);
  cert_from_json(bundle.at("certificates").at("inner"), d.certificates.inner);
  const Json& sets = bundle.at("sets");
  set_from_json(sets.at("G1"), d.sets.g1);
  set_from_json(sets.at("G2"), d.sets.g2);
  d.sets.g1.m = d.certificates.outer.m;
  d.sets.g2.m = d.certificates.inner.m;
  d.sets.x1_max = sets.at("x1_max");
  d.sets.xtilde_max = sets.at("xtilde_max");
  const Json& r = bundle.at("budgets");
  d.budget.eps_vtilde_max = r.at("eps_vtilde_max");
  d.budget.eps_xf_max = r.at("eps_xf_max");
  d.budget.delta_u_max = r.at("delta_u_max");
  d.budget.delta_vdes_max = r.at("delta_vdes_max");
  d.budget.delta1 = r.at("delta1");
  d.budget.delta2 = r.at("delta2");
  d.budget.beta = r.at("beta");
  d.budget.horizon = r.at("N");
  const Json& h = bundle.at("horizons");
  d.horizons.n1_star = h.at("N1_star");
  d.horizons.n2_star = h.at("N2_star");
  d.horizons.q_lump = h.at("Q_lump");
  d.horizons.p_lump = h.at("P_lump");
  d.budget.n1_star = d.horizons.n1_star;
  d.budget.n2_star = d.horizons.n2_star;
  return d;
}

Json certification_json(const CertificationReport& r) {
  return {{"all_passed", r.all_passed()},
          {"k_G", r.k_g},
          {"bound", r.bound},
          {"feasibility", verdict_json(r.feasibility)},
          {"convergence", verdict_json(r.convergence)},
          {"invariance", verdict_json(r.invariance)},
          {"stability", verdict_json(r.stability)}};
}

Json sampling_json(const SamplingReport& r) {
  Json j;
  j["samples"] = r.samples;
  j["seed"] = r.seed;
  j["passed"] = r.passed();
  if (r.no_samples()) j["note"] = "no samples";
  j["evaluated"] = r.evaluated;
  j["violations"] = r.violations;
  Json w = Json::array();
  for (const auto& v : r.witnesses) {
    w.push_back({{"check", v.check}, {"witness", to_json(v.witness)}, {"detail", v.detail}});
  }
  j["witnesses"] = w;
  return j;
}

std::string format_report(const Json& j) {
  std::ostringstream os;
  flatten(j, "", os);
  return os.str();
}

}  // namespace hmpc
