#pragma once

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "krasovskii/matrix_core.h"

namespace krasovskii {

enum class SystemClass { kSwitchedDelay, kCoupled, kSwitchedCoupled, kNeutral, kDiscrete };

std::string_view to_string(SystemClass c);
/// Inverse of to_string; throws Error for unknown names.
SystemClass parse_system_class(std::string_view name);

/// ẋ = A^(σ) f(x(t)) + Σ_r B_r^(σ) f(x(t - τ_r)).
struct SwitchedDelaySystem {
  int n = 0;
  std::vector<Mat> a;               // a[mode], Metzler
  std::vector<std::vector<Mat>> b;  // b[channel][mode], nonnegative
  std::vector<double> delays;       // delays[channel]

  int modes() const { return static_cast<int>(a.size()); }
  int channels() const { return static_cast<int>(b.size()); }
};

/// ẋ = A^(σ) f(x) + B^(σ) y(t - τ),  y(t) = C^(σ) f(x) + D^(σ) y(t - τ).
struct CoupledSystem {
  int n = 0;
  int m = 0;
  std::vector<Mat> a, b, c, d;  // per mode
  double delay = 0.0;

  int modes() const { return static_cast<int>(a.size()); }
  /// True when B and D do not depend on the mode.
  bool shared_b_d() const;
};

/// ẋ(t) - D ẋ(t - τ) = A^(σ) x(t) + G^(σ) x(t - τ), with D shared by all modes.
struct NeutralSystem {
  int n = 0;
  std::vector<Mat> a, g;  // per mode, any sign
  Mat d;
  double delay = 0.0;

  int modes() const { return static_cast<int>(a.size()); }
  /// B^(s) = A^(s) D + G^(s), the delayed gain of the reduced coupled form.
  Mat reduced_b(int mode) const { return a[static_cast<std::size_t>(mode)] * d + g[static_cast<std::size_t>(mode)]; }
};

/// x(k+1) = A^(σ) f(x(k)) + Σ_l B_l^(σ) f(x(k - m_l)).
struct DiscreteDelaySystem {
  int n = 0;
  std::vector<Mat> a;               // a[mode], nonnegative
  std::vector<std::vector<Mat>> b;  // b[channel][mode], nonnegative
  std::vector<int> delays;          // delays[channel], integer steps

  int modes() const { return static_cast<int>(a.size()); }
  int channels() const { return static_cast<int>(b.size()); }
  int max_delay() const;
};

using SystemVariant =
    std::variant<SwitchedDelaySystem, CoupledSystem, NeutralSystem, DiscreteDelaySystem>;

/// Tagged system description. `coupled` and `switched_coupled` share the
/// CoupledSystem payload; the tag selects the certificate construction.
struct SystemDescriptor {
  SystemClass cls = SystemClass::kSwitchedDelay;
  SystemVariant system;
  std::map<std::string, std::string> labels;

  int state_dim() const;
  int modes() const;
};

/// One structural defect: which matrix, which entry (1-based, 0 when the
/// violation concerns the whole matrix) and which rule.
struct Violation {
  std::string matrix;
  int row = 0;
  int col = 0;
  std::string rule;

  std::string message() const;
};

/// Class-specific sign and shape constraints. An empty list means the
/// descriptor satisfies every structural hypothesis of its class.
std::vector<Violation> validate(const SystemDescriptor& sys);

}  // namespace krasovskii
