#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "krasovskii/certificates.h"
#include "krasovskii/simulation.h"

namespace krasovskii {

/// ∫ |g(z)| dz over half-grid indices [from, to] of a buffer, per component.
/// g is sampled as right limits at the left end and left limits at the right
/// end of every sub-interval; the absolute value of the linear interpolant is
/// integrated exactly, so sign changes inside a sub-interval cost no extra
/// error beyond the trapezoid rule's.
Vec window_integral(const HistoryBuffer& buf, long from, long to,
                    const Nonlinearity* f = nullptr);

/// V = νᵀ|x(t_k)| + Σ_r μ_rᵀ ∫_{t_k-τ_r}^{t_k} |f(x(z))| dz.
double eval_V_switched(const Certificate& cert, const HistoryBuffer& x_hist, long k,
                       const std::vector<int>& delay_steps, const Nonlinearity& f);
/// V = νᵀ|x(t_k)| + μᵀ ∫_{t_k-τ}^{t_k} |y(z)| dz.
double eval_V_coupled(const Certificate& cert, const Vec& x, const HistoryBuffer& y_hist, long k,
                      int delay_steps);
/// V = νᵀ|x(t_k) - D x(t_k - τ)| + μᵀ ∫_{t_k-τ}^{t_k} |x(z)| dz with the raw D.
double eval_V_neutral(const Certificate& cert, const HistoryBuffer& x_hist, long k, int delay_steps,
                      const Mat& d);
/// V = νᵀ|x(k)| + Σ_l μ_lᵀ Σ_{i=1..m_l} |f(x(k-i))|; `window` ends with x(k)
/// and holds at least max(m_l) earlier samples.
double eval_V_discrete(const Certificate& cert, const std::vector<Vec>& window,
                       const std::vector<int>& delays, const Nonlinearity& f);

struct MonitorOptions {
  /// Continuous classes: ΔV <= tol_mono · max(1, V).
  double tol_mono = 1e-6;
  /// Discrete classes: ΔV <= tol_discrete.
  double tol_discrete = 1e-12;
  int rate_checks = 100;
  std::uint64_t seed = 0;
  /// Rate checks are skipped when the state norm is below this.
  double near_origin = 1e-9;
};

struct MonitorViolation {
  long step = 0;
  double t = 0.0;
  double v_before = 0.0;
  double v_after = 0.0;
  /// Amount by which the allowed increase was exceeded.
  double excess = 0.0;
  std::string kind;  // "monotone" or "rate"
};

struct MonitorReport {
  SystemClass cls = SystemClass::kSwitchedDelay;
  std::vector<double> v;
  /// ΔV/h per step for continuous classes, ΔV for discrete ones.
  std::vector<double> margins;
  /// Largest (ΔV - allowed) over all checks; <= 0 when everything passed.
  double worst = 0.0;
  std::vector<MonitorViolation> violations;  // first 20
  long violation_count = 0;
  int rate_checked = 0;
  int rate_skipped = 0;
  bool diverged = false;
  bool pass = false;
};

/// Evaluates V along the trajectory and checks its decrease. Throws
/// CertificationError(kClassMismatch) when classes disagree.
MonitorReport check_decrease(const SystemDescriptor& sys, const Trajectory& traj,
                             const Certificate& cert, const Nonlinearity& f,
                             const MonitorOptions& opt = {});

/// Terms of the discrete decrease estimate at step k -> k+1.
struct DiscreteDelta {
  /// V(k+1) - V(k) from eval_V_discrete.
  double delta_v = 0.0;
  /// νᵀ|x(k+1)| - νᵀ|x(k)| + Σ_l μ_lᵀ(|f(x(k))| - |f(x(k-m_l))|).
  double exact = 0.0;
  /// Same with |x(k+1)| replaced by A|f(x(k))| + Σ_l B_l|f(x(k-m_l))|.
  double triangle = 0.0;
  /// ((A - I)ᵀν + Σ_l μ_l)ᵀ|f(x(k))| + Σ_l (B_lᵀν - μ_l)ᵀ|f(x(k-m_l))|.
  double bound = 0.0;
};

DiscreteDelta discrete_delta(const DiscreteDelaySystem& sys, const Certificate& cert,
                             const Trajectory& traj, const Nonlinearity& f, long k);

/// One randomized run: nonlinearity, delays, switching and initial data.
struct Scenario {
  int index = 0;
  std::uint64_t seed = 0;
  Nonlinearity f;
  std::vector<double> delays;       // continuous classes
  SwitchingSignal sigma;            // continuous classes
  std::vector<int> discrete_modes;  // discrete class
  InitialHistory history;           // x (retarded, neutral) or y (coupled)
  Vec x0;                           // coupled
  std::vector<Vec> window;          // discrete
};

struct ScenarioOptions {
  double horizon = 20.0;
  double step = 0.01;
  int discrete_steps = 200;
  double max_delay = 2.0;
  double dwell_min = 0.1;
  double dwell_max = 2.0;
  /// Scenario 0 uses f = identity, the system's own delays and a constant
  /// positive history.
  bool identity_first = true;
};

/// Deterministic in (seed, index).
Scenario make_scenario(const SystemDescriptor& sys, std::uint64_t seed, int index,
                       const ScenarioOptions& opt);
/// Simulates the scenario; the returned trajectory records the scenario seed.
Trajectory run_scenario(const SystemDescriptor& sys, const Scenario& sc, const ScenarioOptions& opt);
/// The system with the scenario's delays substituted.
SystemDescriptor with_scenario_delays(const SystemDescriptor& sys, const Scenario& sc);

/// max(‖x(t_k)‖₂, sup over the delay window of ‖track‖₂) at grid index k.
double state_norm(const Trajectory& traj, long k);

struct ScenarioOutcome {
  int index = 0;
  std::uint64_t seed = 0;
  std::string nonlinearity;
  std::vector<double> delays;
  double initial_norm = 0.0;
  double terminal_norm = 0.0;
  double ratio = 0.0;
  bool diverged = false;
};

struct FalsifyOptions {
  int budget = 20;
  std::uint64_t seed = 0;
  /// 0: KRASOVSKII_THREADS, else the hardware concurrency.
  int threads = 0;
  ScenarioOptions scenario;
};

struct FalsifyResult {
  std::vector<ScenarioOutcome> outcomes;
  /// Scenario with the largest terminal/initial ratio when that ratio
  /// exceeds 1; growth evidence only, never a claim of instability.
  std::optional<ScenarioOutcome> best;
  std::optional<Trajectory> best_trajectory;
};

FalsifyResult falsify(const SystemDescriptor& sys, const FalsifyOptions& opt);

/// KRASOVSKII_THREADS when set to a positive integer, else the hardware
/// concurrency (at least 1).
int default_threads();

}  // namespace krasovskii
