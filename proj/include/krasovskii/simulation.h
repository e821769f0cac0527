#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "krasovskii/nonlinearity.h"
#include "krasovskii/switching.h"
#include "krasovskii/systems.h"

namespace krasovskii {

/// Norm above which a run is declared divergent and truncated.
inline constexpr double kDivergenceBound = 1e12;

/// Samples of a delayed quantity on the half-step grid t = i·h/2, each with
/// a left and a right limit (they differ only where the quantity jumps).
/// Index i runs from first() (the start of the initial history) upward;
/// i = 0 is t = 0. Unlike a ring, the whole run is kept so that monitors can
/// revisit any window.
class HistoryBuffer {
 public:
  HistoryBuffer() = default;
  HistoryBuffer(int dim, double h, long first);

  void push(const Vec& left, const Vec& right);
  void push(const Vec& value) { push(value, value); }

  const Vec& left(long i) const { return left_[slot(i)]; }
  const Vec& right(long i) const { return right_[slot(i)]; }
  /// Largest index stored so far.
  long last() const { return first_ + static_cast<long>(left_.size()) - 1; }
  long first() const { return first_; }
  double h() const { return h_; }
  int dim() const { return dim_; }

 private:
  std::size_t slot(long i) const;

  int dim_ = 0;
  double h_ = 0.0;
  long first_ = 0;
  std::vector<Vec> left_, right_;
};

/// Initial function φ on [-span, 0].
class InitialHistory {
 public:
  InitialHistory() = default;
  explicit InitialHistory(std::function<Vec(double)> fn) : fn_(std::move(fn)) {}

  static InitialHistory constant(Vec c);
  /// Linear interpolation through (times[i], values[i]); constant beyond the
  /// first and last knot.
  static InitialHistory piecewise_linear(std::vector<double> times, std::vector<Vec> values);
  /// Seeded piecewise-linear history with `pieces` segments on [-span, 0] and
  /// knot values uniform in [-amplitude, amplitude] (or [0, amplitude] when
  /// nonnegative is set).
  static InitialHistory random(int dim, double span, std::mt19937_64& rng, int pieces = 4,
                               double amplitude = 1.0, bool nonnegative = false);

  Vec operator()(double theta) const { return fn_(theta); }

 private:
  std::function<Vec(double)> fn_;
};

struct Trajectory {
  SystemClass cls = SystemClass::kSwitchedDelay;
  double h = 0.0;
  std::vector<double> t;
  /// State at each grid time. Coupled: x; neutral: the original x.
  std::vector<Vec> x;
  /// Coupled: y; neutral: y = x - D x(t - τ). Right limits at grid times.
  std::vector<Vec> y;
  /// Mode active on [t_k, t_{k+1}); the last entry repeats the final mode.
  std::vector<int> mode;
  /// Delays in grid steps (continuous) or iteration steps (discrete).
  std::vector<int> delay_steps;
  /// The delayed quantity on the half-step grid from the start of the
  /// initial history: x for retarded systems, y for coupled, the original x
  /// for neutral. Empty for discrete runs.
  HistoryBuffer track;
  /// Discrete runs: x(-M), ..., x(-1).
  std::vector<Vec> prehistory;
  bool diverged = false;
  std::vector<std::string> warnings;
  std::string nonlinearity;
  std::uint64_t seed = 0;

  std::size_t size() const { return t.size(); }
};

struct SimOptions {
  double horizon = 10.0;
  double step = 1e-2;
  /// Half-step samples of the delayed quantity: 3 = cubic Hermite from the
  /// endpoint derivatives, 1 = linear.
  int interpolation_order = 3;
};

/// Classical RK4 on ẋ = A^(σ) f(x) + Σ_r B_r^(σ) f(x(t - τ_r)). Delays and
/// switching instants are snapped to the grid, with a warning when moved.
Trajectory simulate_switched_delay(const SwitchedDelaySystem& sys, const Nonlinearity& f,
                                   const SwitchingSignal& sigma, const InitialHistory& phi,
                                   const SimOptions& opt);

/// RK4 for x with y(t) = C^(σ) f(x) + D^(σ) y(t - τ) assigned after each step.
Trajectory simulate_coupled(const CoupledSystem& sys, const Nonlinearity& f,
                            const SwitchingSignal& sigma, const Vec& x0, const InitialHistory& y0,
                            const SimOptions& opt);

/// Integrates the reduced form ẏ = A^(σ) y + B^(σ) x(t - τ), x = y + D x(t - τ)
/// with B^(σ) = A^(σ) D + G^(σ), from y(0) = φ(0) - D φ(-τ).
Trajectory simulate_neutral(const NeutralSystem& sys, const SwitchingSignal& sigma,
                            const InitialHistory& phi, const SimOptions& opt);

/// Exact iteration. `window` holds x(-M), ..., x(0) with M = sys.max_delay();
/// `modes[k]` is the mode used for the step k -> k+1 (the last entry repeats
/// when the list is shorter than `steps`).
Trajectory simulate_discrete(const DiscreteDelaySystem& sys, const Nonlinearity& f,
                             const std::vector<int>& modes, const std::vector<Vec>& window,
                             int steps);

/// CSV with header t,mode,x_1..x_n[,y_1..y_m]; modes 1-based, %.17g floats.
void write_csv(const Trajectory& traj, std::ostream& out);

}  // namespace krasovskii
