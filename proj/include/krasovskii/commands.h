#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "krasovskii/io.h"

namespace krasovskii {

/// Process exit codes shared by every command.
enum ExitCode : int {
  kExitOk = 0,
  /// Unreadable file, schema error, bad flag or incompatible certificate.
  kExitUsage = 1,
  /// The system violates a sign or shape hypothesis of its class.
  kExitInvalid = 2,
  /// No certificate: UNSAT, D-condition failure, composite not Hurwitz, ...
  kExitNoCertificate = 3,
  /// The supplied certificate's functional failed the decrease monitor.
  kExitMonitorFailed = 4,
};

struct CommandResult {
  int exit_code = kExitOk;
  Json report;
  /// Human-readable summary for stderr.
  std::string message;
};

CommandResult cmd_check(const std::string& path);
CommandResult cmd_certify(const std::string& path);

struct SimulateFlags {
  /// Replaces every delay (discrete systems: a whole number of steps).
  std::optional<double> tau;
  /// Discrete systems: number of iterations.
  double horizon = 10.0;
  double step = 0.01;
  /// "constant:K", "periodic:DWELL", "random:MIN:MAX" or "T0:K0,T1:K1,...";
  /// modes are 1-based. Discrete runs read the signal at integer times.
  std::string signal = "constant:1";
  std::string nonlinearity = "identity";
  std::uint64_t seed = 0;
  std::optional<std::string> cert_path;
  std::optional<std::string> trace_path;
};

CommandResult cmd_simulate(const std::string& path, const SimulateFlags& flags);

struct FalsifyFlags {
  int budget = 20;
  std::uint64_t seed = 0;
  /// 0: KRASOVSKII_THREADS or the hardware concurrency.
  int threads = 0;
  double horizon = 20.0;
  double step = 0.01;
  std::optional<std::string> trace_path;
};

CommandResult cmd_falsify(const std::string& path, const FalsifyFlags& flags);

/// Parses the --signal syntax for a system with `modes` modes.
SwitchingSignal parse_signal(const std::string& spec, int modes, double horizon, std::uint64_t seed);

}  // namespace krasovskii
