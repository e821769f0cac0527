#include "krasovskii/commands.h"

#include <cmath>
#include <fstream>
#include <sstream>

namespace krasovskii {
namespace {

class FlagError : public Error {
 public:
  using Error::Error;
};

struct Loaded {
  SystemDescriptor sys;
  std::string hash;
};

Json header(const std::string& command, const std::string& path) {
  return {{"tool", "krasovskii"}, {"version", KRASOVSKII_VERSION}, {"command", command}, {"input", {{"path", path}}}};
}

Loaded load(const std::string& path, Json& report) {
  Loaded out{system_from_json(read_json_file(path)), {}};
  out.hash = input_hash(out.sys);
  report["input"]["sha256"] = out.hash;
  report["class"] = std::string(to_string(out.sys.cls));
  return out;
}

CommandResult finish(Json report, int code, std::string status, std::string message) {
  report["status"] = status;
  report["exit_code"] = code;
  return {code, std::move(report), std::move(message)};
}

bool invalid(const SystemDescriptor& sys, Json& report) {
  const auto vs = validate(sys);
  report["validation"] = {{"ok", vs.empty()}, {"violations", violations_to_json(vs)}};
  return !vs.empty();
}

std::string invalid_message(const Json& report) {
  std::string msg = "structurally invalid:";
  for (const auto& v : report["validation"]["violations"]) msg += "\n  " + v["message"].get<std::string>();
  return msg;
}

CommandResult failure(Json report, const CertificationError& e) {
  report["failure"] = {{"reason", std::string(to_string(e.reason()))}, {"detail", e.what()}};
  if (e.reason() == FailureReason::kInvalidSystem)
    return finish(std::move(report), kExitInvalid, "invalid", e.what());
  if (e.reason() == FailureReason::kClassMismatch)
    return finish(std::move(report), kExitUsage, "error", e.what());
  return finish(std::move(report), kExitNoCertificate, "no_certificate", std::string(to_string(e.reason())));
}

/// Turns every exception into a report so that no command escapes with one.
template <class Fn>
CommandResult guarded(const std::string& command, const std::string& path, Fn&& fn) {
  Json report = header(command, path);
  try {
    return fn(report);
  } catch (const ParseError& e) {
    report["error"] = {{"path", e.path()}, {"message", e.what()}};
    return finish(std::move(report), kExitUsage, "error", e.what());
  } catch (const CertificationError& e) {
    return failure(std::move(report), e);
  } catch (const std::exception& e) {
    report["error"] = {{"message", e.what()}};
    return finish(std::move(report), kExitUsage, "error", e.what());
  }
}

double parse_number(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) throw FlagError(what + ": not a number: \"" + s + "\"");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, sep)) out.push_back(part);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

int parse_mode(const std::string& s, int modes) {
  const double k = parse_number(s, "--signal mode");
  if (k != std::floor(k) || k < 1 || k > modes)
    throw FlagError("--signal: mode " + s + " outside 1.." + std::to_string(modes));
  return static_cast<int>(k) - 1;
}

SystemDescriptor with_tau(SystemDescriptor sys, double tau) {
  if (!(tau >= 0.0)) throw FlagError("--tau must be nonnegative");
  std::visit(
      [&](auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SwitchedDelaySystem>) {
          for (auto& d : s.delays) d = tau;
        } else if constexpr (std::is_same_v<T, DiscreteDelaySystem>) {
          if (tau != std::floor(tau) || tau > 1e6) throw FlagError("--tau must be a whole number of steps for discrete systems");
          for (auto& d : s.delays) d = static_cast<int>(tau);
        } else {
          s.delay = tau;
        }
      },
      sys.system);
  return sys;
}

Json trajectory_summary(const Trajectory& traj) {
  const long last = static_cast<long>(traj.size()) - 1;
  const double initial = state_norm(traj, 0);
  const double terminal = state_norm(traj, last);
  const double ratio = initial > 0.0 ? terminal / initial : 0.0;
  return {{"steps", last},
          {"h", traj.h},
          {"delay_steps", traj.delay_steps},
          {"nonlinearity", traj.nonlinearity},
          {"diverged", traj.diverged},
          {"warnings", traj.warnings},
          {"initial_norm", initial},
          {"terminal_norm", terminal},
          {"ratio", ratio},
          {"growth", traj.diverged || ratio > 1.0}};
}

void write_trace(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FlagError("cannot write " + path);
  write_csv(traj, out);
  if (!out) throw FlagError("failed writing " + path);
}

}  // namespace

SwitchingSignal parse_signal(const std::string& spec, int modes, double horizon, std::uint64_t seed) {
  const auto parts = split(spec, ':');
  if (spec.find(',') == std::string::npos && !parts.empty()) {
    if (parts[0] == "constant") {
      if (parts.size() > 2) throw FlagError("--signal constant takes one mode");
      return SwitchingSignal::constant(parts.size() == 2 ? parse_mode(parts[1], modes) : 0);
    }
    if (parts[0] == "periodic" || parts[0] == "random") {
      SignalSpec s;
      s.seed = seed;
      if (parts[0] == "periodic") {
        if (parts.size() != 2) throw FlagError("--signal periodic:DWELL");
        s.kind = SignalSpec::Kind::kPeriodic;
        s.dwell = parse_number(parts[1], "--signal dwell");
        if (!(s.dwell > 0.0)) throw FlagError("--signal: dwell must be positive");
      } else {
        if (parts.size() != 3) throw FlagError("--signal random:MIN:MAX");
        s.kind = SignalSpec::Kind::kRandom;
        s.dwell_min = parse_number(parts[1], "--signal dwell");
        s.dwell_max = parse_number(parts[2], "--signal dwell");
        if (!(s.dwell_min > 0.0 && s.dwell_max >= s.dwell_min))
          throw FlagError("--signal: need 0 < MIN <= MAX");
      }
      return sample_signal(s, horizon, modes);
    }
  }
  std::vector<double> times;
  std::vector<int> ms;
  for (const auto& item : split(spec, ',')) {
    const auto tk = split(item, ':');
    if (tk.size() != 2) throw FlagError("--signal: expected T:MODE pairs, got \"" + item + "\"");
    times.push_back(parse_number(tk[0], "--signal time"));
    ms.push_back(parse_mode(tk[1], modes));
  }
  try {
    return SwitchingSignal(std::move(times), std::move(ms));
  } catch (const Error& e) {
    throw FlagError(std::string("--signal: ") + e.what());
  }
}

CommandResult cmd_check(const std::string& path) {
  return guarded("check", path, [&](Json& report) {
    const auto in = load(path, report);
    if (invalid(in.sys, report)) return finish(std::move(report), kExitInvalid, "invalid", invalid_message(report));
    const FeasibilityProblem problem = theorem_condition(in.sys);
    const FeasibilityResult res = find_common_vector(problem);
    report["feasibility"] = feasibility_to_json(res);
    report["feasibility"]["conditions"] = problem.matrices.size();
    if (!res.sat()) return finish(std::move(report), kExitNoCertificate, "unsat", "UNSAT");
    return finish(std::move(report), kExitOk, "feasible", "SAT");
  });
}

CommandResult cmd_certify(const std::string& path) {
  return guarded("certify", path, [&](Json& report) {
    const auto in = load(path, report);
    if (invalid(in.sys, report)) return finish(std::move(report), kExitInvalid, "invalid", invalid_message(report));
    const Certificate cert = certify(in.sys);
    report["certificate"] = certificate_to_json(cert);
    const MarginReport margins = verify_certificate(in.sys, cert);
    report["margins"] = margins_to_json(margins);
    return finish(std::move(report), kExitOk, "certified", "certified (" + cert.derivation.construction + ")");
  });
}

CommandResult cmd_simulate(const std::string& path, const SimulateFlags& flags) {
  return guarded("simulate", path, [&](Json& report) {
    const auto in = load(path, report);
    if (invalid(in.sys, report)) return finish(std::move(report), kExitInvalid, "invalid", invalid_message(report));
    const SystemDescriptor sys = flags.tau ? with_tau(in.sys, *flags.tau) : in.sys;
    const int n = sys.state_dim();
    const bool discrete = sys.cls == SystemClass::kDiscrete;
    if (!(flags.horizon > 0.0)) throw FlagError("--horizon must be positive");
    if (!(flags.step > 0.0)) throw FlagError("--step must be positive");

    Nonlinearity f;
    try {
      f = Nonlinearity::uniform(n, parse_scalar_nonlinearity(flags.nonlinearity));
    } catch (const Error& e) {
      throw FlagError(std::string("--nonlinearity: ") + e.what());
    }
    if (discrete && !f.discrete_admissible())
      throw FlagError("--nonlinearity: discrete systems need |f(x)| <= |x|");
    if (sys.cls == SystemClass::kNeutral && !f.is_identity())
      throw FlagError("--nonlinearity: neutral systems are linear; only identity applies");
    const SwitchingSignal sigma = parse_signal(flags.signal, sys.modes(), flags.horizon, flags.seed);

    Trajectory traj;
    SimOptions opt;
    opt.horizon = flags.horizon;
    opt.step = flags.step;
    switch (sys.cls) {
      case SystemClass::kSwitchedDelay:
        traj = simulate_switched_delay(std::get<SwitchedDelaySystem>(sys.system), f, sigma,
                                       InitialHistory::constant(Vec::Ones(n)), opt);
        break;
      case SystemClass::kCoupled:
      case SystemClass::kSwitchedCoupled: {
        const auto& s = std::get<CoupledSystem>(sys.system);
        traj = simulate_coupled(s, f, sigma, Vec::Ones(n), InitialHistory::constant(Vec::Ones(s.m)), opt);
        break;
      }
      case SystemClass::kNeutral:
        traj = simulate_neutral(std::get<NeutralSystem>(sys.system), sigma, InitialHistory::constant(Vec::Ones(n)),
                                opt);
        break;
      case SystemClass::kDiscrete: {
        const auto& s = std::get<DiscreteDelaySystem>(sys.system);
        const long steps = std::lround(flags.horizon);
        if (steps < 1 || steps > 10'000'000) throw FlagError("--horizon: discrete runs need 1..1e7 steps");
        std::vector<int> modes;
        for (long k = 0; k < steps; ++k) modes.push_back(sigma.mode_at(static_cast<double>(k)));
        traj = simulate_discrete(s, f, modes, std::vector<Vec>(static_cast<std::size_t>(s.max_delay()) + 1, Vec::Ones(n)),
                                 static_cast<int>(steps));
        break;
      }
    }
    traj.seed = flags.seed;
    report["seed"] = flags.seed;
    report["trajectory"] = trajectory_summary(traj);
    if (flags.trace_path) {
      write_trace(traj, *flags.trace_path);
      report["trace"] = *flags.trace_path;
    }
    if (!flags.cert_path) return finish(std::move(report), kExitOk, "simulated", "simulated");

    const Json cert_json = read_json_file(*flags.cert_path);
    const Certificate cert = certificate_from_json(cert_json);
    if (cert.cls != sys.cls)
      throw FlagError("incompatible certificate: class " + std::string(to_string(cert.cls)) + " for a " +
                      std::string(to_string(sys.cls)) + " system");
    if (cert.nu.size() != n) throw FlagError("incompatible certificate: ν has the wrong dimension");
    if (cert_json.contains("input") && cert_json["input"].contains("sha256") &&
        cert_json["input"]["sha256"] != in.hash)
      report["warnings"].push_back("certificate was issued for a different system file");
    try {
      report["margins"] = margins_to_json(verify_certificate(sys, cert));
    } catch (const Error& e) {
      throw FlagError(std::string("incompatible certificate: ") + e.what());
    }
    MonitorOptions mopt;
    mopt.seed = flags.seed;
    const MonitorReport mon = check_decrease(sys, traj, cert, f, mopt);
    report["monitor"] = monitor_to_json(mon);
    if (!mon.pass) return finish(std::move(report), kExitMonitorFailed, "monitor_fail", "functional failed to decrease");
    return finish(std::move(report), kExitOk, "monitor_pass", "functional decreased");
  });
}

CommandResult cmd_falsify(const std::string& path, const FalsifyFlags& flags) {
  return guarded("falsify", path, [&](Json& report) {
    const auto in = load(path, report);
    if (invalid(in.sys, report)) return finish(std::move(report), kExitInvalid, "invalid", invalid_message(report));
    if (flags.budget < 1 || flags.budget > 100000) throw FlagError("--budget must be in 1..100000");
    if (!(flags.horizon > 0.0) || !(flags.step > 0.0)) throw FlagError("--horizon and --step must be positive");
    FalsifyOptions opt;
    opt.budget = flags.budget;
    opt.seed = flags.seed;
    opt.threads = flags.threads;
    opt.scenario.horizon = flags.horizon;
    opt.scenario.step = flags.step;
    const FalsifyResult res = falsify(in.sys, opt);
    report["seed"] = flags.seed;
    report["budget"] = flags.budget;
    Json outcomes = Json::array();
    for (const auto& o : res.outcomes) outcomes.push_back(outcome_to_json(o));
    report["scenarios"] = outcomes;
    report["note"] = "growth evidence only; absence of growth is not a stability claim and growth is not a proof of instability";
    if (!res.best) {
      report["result"] = "none found";
      return finish(std::move(report), kExitOk, "none found", "none found");
    }
    report["result"] = "growth evidence";
    report["evidence"] = outcome_to_json(*res.best);
    if (flags.trace_path && res.best_trajectory) {
      write_trace(*res.best_trajectory, *flags.trace_path);
      report["trace"] = *flags.trace_path;
    }
    std::ostringstream msg;
    msg << "growth evidence: scenario " << res.best->index << ", ratio " << res.best->ratio;
    return finish(std::move(report), kExitOk, "growth evidence", msg.str());
  });
}

}  // namespace krasovskii
