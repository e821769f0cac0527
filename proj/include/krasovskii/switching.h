#pragma once

#include <cstdint>
#include <vector>

namespace krasovskii {

/// Piecewise-constant, right-continuous mode selector. Modes are 0-based;
/// mode i is active on [breakpoints[i], breakpoints[i+1]).
class SwitchingSignal {
 public:
  SwitchingSignal() : SwitchingSignal({0.0}, {0}) {}
  SwitchingSignal(std::vector<double> breakpoints, std::vector<int> modes);

  static SwitchingSignal constant(int mode) { return SwitchingSignal({0.0}, {mode}); }

  int mode_at(double t) const;
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<int>& modes() const { return modes_; }
  int max_mode() const;

 private:
  std::vector<double> breakpoints_;
  std::vector<int> modes_;
};

struct SignalSpec {
  enum class Kind { kPeriodic, kRandom };
  Kind kind = Kind::kPeriodic;
  double dwell = 1.0;      // periodic
  double dwell_min = 0.5;  // random
  double dwell_max = 2.0;  // random
  std::uint64_t seed = 0;
};

/// Periodic signals cycle through modes 0, 1, ..., N-1 with a fixed dwell.
/// Random signals draw dwell times uniformly from [dwell_min, dwell_max] and
/// modes uniformly, deterministically from the seed. Both cover [0, horizon].
SwitchingSignal sample_signal(const SignalSpec& spec, double horizon, int modes);

}  // namespace krasovskii
