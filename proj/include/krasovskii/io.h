#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "krasovskii/certificates.h"
#include "krasovskii/feasibility.h"
#include "krasovskii/monitor.h"
#include "krasovskii/systems.h"

namespace krasovskii {

using Json = nlohmann::json;

/// Schema error; path() is a JSON path such as "$.B[0][1][2]".
class ParseError : public Error {
 public:
  ParseError(std::string path, const std::string& what);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// System file layout (matrices are row-major nested arrays, one per mode):
///   switched_delay: n, N, A[N], B[channel][N], delays[channel]
///   coupled, switched_coupled: n, m, N, A[N], B[N], C[N], D[N], delay
///   neutral: n, N, A[N], G[N], D, delay
///   discrete: n, N, A[N], B[channel][N], delays[channel] (integers)
/// plus an optional "labels" object of strings. Sign conditions are left to
/// validate(); this only enforces shapes and types.
SystemDescriptor system_from_json(const Json& j);
Json system_to_json(const SystemDescriptor& sys);
/// Reads and parses a file; I/O and syntax problems become ParseError("$").
Json read_json_file(const std::string& path);

/// Hex SHA-256 of the canonical (key-sorted, compact) serialization.
std::string input_hash(const SystemDescriptor& sys);

Json certificate_to_json(const Certificate& cert);
/// Accepts a bare certificate or a report carrying one under "certificate".
Certificate certificate_from_json(const Json& j);

Json violations_to_json(const std::vector<Violation>& vs);
Json feasibility_to_json(const FeasibilityResult& r);
Json margins_to_json(const MarginReport& r);
/// Summary without the per-step V series.
Json monitor_to_json(const MonitorReport& r);
Json outcome_to_json(const ScenarioOutcome& o);

}  // namespace krasovskii
