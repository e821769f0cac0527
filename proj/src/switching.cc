#include "krasovskii/switching.h"

#include <algorithm>
#include <random>
#include <string>

#include "krasovskii/errors.h"

namespace krasovskii {

SwitchingSignal::SwitchingSignal(std::vector<double> breakpoints, std::vector<int> modes)
    : breakpoints_(std::move(breakpoints)), modes_(std::move(modes)) {
  if (breakpoints_.empty() || breakpoints_.size() != modes_.size()) {
    throw Error("SwitchingSignal: need one mode per breakpoint");
  }
  if (breakpoints_.front() != 0.0) throw Error("SwitchingSignal: first breakpoint must be 0");
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] > breakpoints_[i - 1])) {
      throw Error("SwitchingSignal: breakpoints must increase strictly");
    }
  }
  for (int m : modes_)
    if (m < 0) throw Error("SwitchingSignal: negative mode index");
}

int SwitchingSignal::mode_at(double t) const {
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  if (it == breakpoints_.begin()) return modes_.front();
  return modes_[static_cast<std::size_t>(it - breakpoints_.begin() - 1)];
}

int SwitchingSignal::max_mode() const { return *std::max_element(modes_.begin(), modes_.end()); }

SwitchingSignal sample_signal(const SignalSpec& spec, double horizon, int modes) {
  if (modes < 1) throw Error("sample_signal: need at least one mode");
  if (!(horizon > 0.0)) throw Error("sample_signal: horizon must be positive");
  std::vector<double> bps;
  std::vector<int> ms;
  if (modes == 1) return SwitchingSignal::constant(0);
  if (spec.kind == SignalSpec::Kind::kPeriodic) {
    if (!(spec.dwell > 0.0)) throw Error("sample_signal: dwell must be positive");
    for (long k = 0; static_cast<double>(k) * spec.dwell < horizon; ++k) {
      bps.push_back(static_cast<double>(k) * spec.dwell);
      ms.push_back(static_cast<int>(k % modes));
    }
    return SwitchingSignal(std::move(bps), std::move(ms));
  }
  if (!(spec.dwell_min > 0.0) || spec.dwell_max < spec.dwell_min) {
    throw Error("sample_signal: need 0 < dwell_min <= dwell_max");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> dwell(spec.dwell_min, spec.dwell_max);
  std::uniform_int_distribution<int> mode(0, modes - 1);
  double t = 0.0;
  while (t < horizon) {
    bps.push_back(t);
    ms.push_back(mode(rng));
    t += dwell(rng);
  }
  return SwitchingSignal(std::move(bps), std::move(ms));
}

}  // namespace krasovskii
