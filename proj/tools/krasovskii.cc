// Command-line front end: check, certify, simulate, falsify.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "krasovskii/commands.h"

using namespace krasovskii;

namespace {

int emit(const CommandResult& res, const std::string& out_path) {
  const std::string text = res.report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out || !(out << text)) {
      std::cerr << "krasovskii: cannot write " << out_path << "\n";
      return kExitUsage;
    }
  }
  std::cerr << res.report.value("command", "") << ": " << res.message << "\n";
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Absolute-stability certificates for switched positive time-delay systems"};
  app.set_version_flag("--version", std::string(KRASOVSKII_VERSION));
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 ok, 1 parse/schema/flag error, 2 structurally invalid system,\n"
      "3 no certificate (UNSAT or a failed side condition), 4 monitor violation.\n"
      "KRASOVSKII_THREADS bounds falsification parallelism.");

  std::string path, out;

  auto* check = app.add_subcommand("check", "Validate the system and decide the feasibility condition");
  check->add_option("system", path, "System JSON file")->required();
  check->add_option("-o,--out", out, "Write the report here instead of stdout");

  auto* cert = app.add_subcommand("certify", "Construct and verify the functional coefficients");
  cert->add_option("system", path, "System JSON file")->required();
  cert->add_option("-o,--out", out, "Write the certificate report here instead of stdout");

  SimulateFlags sim;
  std::string cert_path, trace_path;
  double tau = 0.0;
  auto* simulate = app.add_subcommand("simulate", "Simulate one run and monitor a certificate along it");
  simulate->add_option("system", path, "System JSON file")->required();
  simulate->add_option("--cert", cert_path, "Certificate (or certify report) to monitor");
  auto* tau_opt = simulate->add_option("--tau", tau, "Replace every delay (discrete: whole steps)");
  simulate->add_option("--horizon", sim.horizon, "Final time (discrete: iterations)")->capture_default_str();
  simulate->add_option("--step", sim.step, "Integration step")->capture_default_str();
  simulate->add_option("--signal", sim.signal, "constant:K | periodic:DWELL | random:MIN:MAX | T0:K0,T1:K1,...")
      ->capture_default_str();
  simulate->add_option("--nonlinearity", sim.nonlinearity, "identity | tanh:G | cubic | saturation:L | pwl:S1:S2")
      ->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Seed for random signals and rate spot checks")->capture_default_str();
  simulate->add_option("--trace", trace_path, "Write the trajectory CSV here");
  simulate->add_option("-o,--out", out, "Write the report here instead of stdout");

  FalsifyFlags fal;
  std::string fal_trace;
  auto* falsify_cmd = app.add_subcommand("falsify", "Search random scenarios for growth evidence");
  falsify_cmd->add_option("system", path, "System JSON file")->required();
  falsify_cmd->add_option("--budget", fal.budget, "Number of scenarios")->capture_default_str();
  falsify_cmd->add_option("--seed", fal.seed, "Base seed")->capture_default_str();
  falsify_cmd->add_option("--horizon", fal.horizon, "Final time of each run")->capture_default_str();
  falsify_cmd->add_option("--step", fal.step, "Integration step")->capture_default_str();
  falsify_cmd->add_option("--threads", fal.threads, "Worker threads (0: KRASOVSKII_THREADS or all cores)")
      ->capture_default_str();
  falsify_cmd->add_option("--trace", fal_trace, "Write the best scenario's trajectory CSV here");
  falsify_cmd->add_option("-o,--out", out, "Write the report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*check) return emit(cmd_check(path), out);
  if (*cert) return emit(cmd_certify(path), out);
  if (*simulate) {
    if (*tau_opt) sim.tau = tau;
    if (!cert_path.empty()) sim.cert_path = cert_path;
    if (!trace_path.empty()) sim.trace_path = trace_path;
    return emit(cmd_simulate(path, sim), out);
  }
  if (!fal_trace.empty()) fal.trace_path = fal_trace;
  return emit(cmd_falsify(path, fal), out);
}
