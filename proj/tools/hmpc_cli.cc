// Command-line front end: synthesize, simulate, certify, report.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hmpc/errors.h"
#include "hmpc/scenario.h"

namespace {

using hmpc::Json;

enum Exit {
  kOk = 0,
  kUsage = 1,
  kAssumption = 2,
  kSmallGain = 3,
  kNotInX = 4,
  kTheoryViolation = 5,
  kCertifyViolation = 6,
};

struct Options {
  std::string scenario;
  std::string bundle;
  std::string out;
  std::string report;
  std::optional<int> steps;
  int samples = 10000;
  std::uint64_t seed = hmpc::kDefaultSeed;
  std::optional<std::string> mode;
};

hmpc::Scenario read_scenario(const Options& o) {
  Json raw = hmpc::load_json(o.scenario);
  if (o.mode) raw["design"]["mode"] = *o.mode;
  return hmpc::parse_scenario(raw);
}

void emit(const std::string& path, const Json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
  } else {
    hmpc::save_json(path, j);
  }
}

int cmd_synthesize(const Options& o) {
  const hmpc::Scenario s = read_scenario(o);
  try {
    const hmpc::ControllerDesign d = hmpc::design_from_scenario(s);
    emit(o.out, hmpc::bundle_json(s, d));
    std::cout << "synthesis ok: lambda1 = " << d.sets.g1.lambda << ", lambda2 = " << d.sets.g2.lambda
              << ", N1* = " << d.horizons.n1_star << ", N2* = " << d.horizons.n2_star << "\n";
    return kOk;
  } catch (const hmpc::AssumptionError& e) {
    emit(o.out, hmpc::failure_bundle(s, "assumption_failure", e.what(),
                                     {{"assumption", e.assumption()}}));
    std::cerr << e.what() << "\n";
    return kAssumption;
  } catch (const hmpc::StructuralError& e) {
    emit(o.out, hmpc::failure_bundle(s, "assumption_failure", e.what(), {{"matrix", e.matrix()}}));
    std::cerr << e.what() << "\n";
    return kAssumption;
  } catch (const hmpc::SmallGainError& e) {
    emit(o.out, hmpc::failure_bundle(s, "small_gain_failure", e.what(),
                                     {{"gamma1", e.gamma1()}, {"gamma2", e.gamma2()}}));
    std::cerr << e.what() << "\n";
    return kSmallGain;
  } catch (const hmpc::SolvabilityError& e) {
    emit(o.out, hmpc::failure_bundle(s, "solvability_failure", e.what(),
                                     {{"lhs", e.lhs()}, {"rhs", e.rhs()}}));
    std::cerr << e.what() << "\n";
    return kSmallGain;
  }
}

int cmd_simulate(const Options& o) {
  const Json bundle = hmpc::load_json(o.bundle);
  const hmpc::Scenario s = read_scenario(o);
  if (hmpc::scenario_hash(s.raw) != bundle.value("scenario_hash", "")) {
    std::cerr << "bundle was synthesized from a different scenario\n";
    return kUsage;
  }
  const hmpc::ControllerDesign d = hmpc::design_from_bundle(bundle);
  const int steps = o.steps.value_or(s.steps);
  const hmpc::SimulationRun run = hmpc::run_closed_loop(d, s.initial, steps, s.name);

  if (!o.out.empty()) {
    std::ofstream trace(o.out);
    if (!trace) throw hmpc::ParameterError("cannot write " + o.out);
    hmpc::write_trace(trace, run);
  }
  Json report;
  report["scenario"] = s.name;
  report["steps"] = static_cast<int>(run.records.size());
  report["in_X"] = run.in_x;
  report["initial_consistency"] = run.initial_consistency;
  report["infeasible_solves"] = run.infeasible_solves;
  if (!run.fault.empty()) report["fault"] = {{"message", run.fault}, {"dump", run.fault_dump}};
  const hmpc::CertificationReport cert = hmpc::certify_run(run, d);
  report["certification"] = hmpc::certification_json(cert);
  const std::string report_path =
      !o.report.empty() ? o.report : (o.out.empty() ? "-" : o.out + ".report.json");
  emit(report_path, report);

  if (!run.in_x) {
    std::cerr << "initial state is outside X\n";
    return kNotInX;
  }
  if (!run.fault.empty()) {
    std::cerr << run.fault << "\n";
    return kTheoryViolation;
  }
  return cert.all_passed() ? kOk : kCertifyViolation;
}

int cmd_certify(const Options& o) {
  const Json bundle = hmpc::load_json(o.bundle);
  const hmpc::ControllerDesign d = hmpc::design_from_bundle(bundle);
  const hmpc::SamplingReport r = hmpc::run_sampling_checks(d, o.samples, o.seed);
  emit(o.out, hmpc::sampling_json(r));
  if (r.no_samples()) std::cout << "no samples\n";
  return r.passed() ? kOk : kCertifyViolation;
}

int cmd_report(const Options& o) {
  const Json bundle = hmpc::load_json(o.bundle);
  const std::string text = hmpc::format_report(bundle);
  if (o.out.empty() || o.out == "-") {
    std::cout << text;
  } else {
    std::ofstream(o.out) << text;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical MPC workbench"};
  app.require_subcommand(1);
  Options o;

  auto* syn = app.add_subcommand("synthesize", "Derive gains, certificates, sets and budgets");
  syn->add_option("--scenario", o.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  syn->add_option("--out", o.out, "Certificate bundle to write (default stdout)");
  syn->add_option("--mode", o.mode, "Matching mode")->check(CLI::IsMember({"exact", "inexact"}));

  auto* sim = app.add_subcommand("simulate", "Run the closed loop and certify the run");
  sim->add_option("--scenario", o.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--bundle", o.bundle, "Certificate bundle")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", o.out, "Trace CSV to write");
  sim->add_option("--report", o.report, "Run report (default <out>.report.json)");
  sim->add_option("--steps", o.steps, "Number of steps");
  sim->add_option("--mode", o.mode, "Matching mode")->check(CLI::IsMember({"exact", "inexact"}));

  auto* cer = app.add_subcommand("certify", "Monte Carlo check of the bundle invariants");
  cer->add_option("--bundle", o.bundle, "Certificate bundle")->required()->check(CLI::ExistingFile);
  cer->add_option("--samples", o.samples, "Samples per check")->check(CLI::NonNegativeNumber);
  cer->add_option("--seed", o.seed, "Random seed");
  cer->add_option("--out", o.out, "Sampling report (default stdout)");

  auto* rep = app.add_subcommand("report", "Print a bundle as key = value lines");
  rep->add_option("--bundle", o.bundle, "Certificate bundle")->required()->check(CLI::ExistingFile);
  rep->add_option("--out", o.out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }
  try {
    if (syn->parsed()) return cmd_synthesize(o);
    if (sim->parsed()) return cmd_simulate(o);
    if (cer->parsed()) return cmd_certify(o);
    if (rep->parsed()) return cmd_report(o);
  } catch (const hmpc::AssumptionError& e) {
    std::cerr << e.what() << "\n";
    return kAssumption;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
