#include "krasovskii/simulation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace krasovskii {
namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

long checked_steps(double horizon, double h, std::vector<std::string>& warnings) {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error("simulation: step must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw Error("simulation: horizon must be positive");
  const long steps = std::max<long>(1, std::lround(horizon / h));
  if (std::abs(static_cast<double>(steps) * h - horizon) > 1e-9 * horizon) {
    warnings.push_back("horizon " + fmt(horizon) + " snapped to " + fmt(static_cast<double>(steps) * h));
  }
  return steps;
}

int snap_delay(double tau, double h, std::vector<std::string>& warnings) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw Error("simulation: delay must be nonnegative");
  const long k = std::lround(tau / h);
  if (std::abs(static_cast<double>(k) * h - tau) > 1e-9 * std::max(1.0, tau)) {
    warnings.push_back("delay " + fmt(tau) + " snapped to " + fmt(static_cast<double>(k) * h));
  }
  return static_cast<int>(k);
}

// Mode for every step n = 0..steps (the final entry only labels the last
// sample). Breakpoints take effect at the nearest grid point.
std::vector<int> step_modes(const SwitchingSignal& sigma, long steps, double h, int n_modes,
                            std::vector<std::string>& warnings) {
  if (sigma.max_mode() >= n_modes) {
    throw Error("switching signal uses mode " + std::to_string(sigma.max_mode() + 1) +
                " but the system has " + std::to_string(n_modes));
  }
  std::vector<int> modes(static_cast<std::size_t>(steps + 1), sigma.modes().front());
  bool moved = false;
  const auto& bps = sigma.breakpoints();
  for (std::size_t j = 1; j < bps.size(); ++j) {
    const long at = std::lround(bps[j] / h);
    if (std::abs(static_cast<double>(at) * h - bps[j]) > 1e-9 * std::max(1.0, bps[j])) moved = true;
    for (long n = std::max<long>(at, 0); n <= steps; ++n) modes[static_cast<std::size_t>(n)] = sigma.modes()[j];
  }
  if (moved) warnings.push_back("switching instants snapped to the step grid");
  return modes;
}

bool escaped(const Vec& v) { return !v.allFinite() || v.norm() > kDivergenceBound; }

Vec hermite_mid(const Vec& x0, const Vec& x1, const Vec& d0, const Vec& d1, double h, int order) {
  if (order == 1) return 0.5 * (x0 + x1);
  return 0.5 * (x0 + x1) + (h / 8.0) * (d0 - d1);
}

void check_order(int order) {
  if (order != 1 && order != 3) throw Error("simulation: interpolation order must be 1 or 3");
}

// ẋ = A^(s) f(x) + B^(s) y(t - τ),  y = C^(s) f(x) + D^(s) y(t - τ).
struct CoupledModel {
  int n = 0, m = 0;
  std::vector<Mat> a, b, c, d;
  Nonlinearity f;
};

struct CoupledRun {
  std::vector<Vec> x, y;
  std::vector<int> modes;
  HistoryBuffer track;
  int k = 0;
  bool diverged = false;
  std::vector<std::string> warnings;
  double h = 0.0;
};

CoupledRun run_coupled(const CoupledModel& mdl, const SwitchingSignal& sigma, const Vec& x0,
                       const std::function<Vec(double)>& y0, double tau, const SimOptions& opt) {
  check_order(opt.interpolation_order);
  CoupledRun run;
  const double h = opt.step;
  run.h = h;
  const long steps = checked_steps(opt.horizon, h, run.warnings);
  const int k = snap_delay(tau, h, run.warnings);
  run.k = k;
  run.modes = step_modes(sigma, steps, h, static_cast<int>(mdl.a.size()), run.warnings);
  if (x0.size() != mdl.n) throw DimensionError("simulation: initial state has wrong dimension");
  if (mdl.f.dim() != mdl.n) throw DimensionError("simulation: nonlinearity has wrong dimension");

  Vec x = x0;
  run.x.push_back(x);
  const auto mode = [&](long n) { return static_cast<std::size_t>(run.modes[static_cast<std::size_t>(n)]); };

  if (k == 0) {
    // y = (I - D)⁻¹ C f(x): an ODE per mode.
    std::vector<Mat> gain, ode;
    for (std::size_t s = 0; s < mdl.a.size(); ++s) {
      Eigen::FullPivLU<Mat> lu(Mat::Identity(mdl.m, mdl.m) - mdl.d[s]);
      if (!lu.isInvertible()) throw Error("simulation: I - D is singular, τ = 0 is ill-posed");
      gain.push_back(lu.solve(mdl.c[s]));
      ode.push_back(mdl.a[s] + mdl.b[s] * gain.back());
    }
    run.track = HistoryBuffer(mdl.m, h, 0);
    run.track.push(y0(0.0), gain[mode(0)] * mdl.f.apply(x));
    run.y.push_back(run.track.right(0));
    for (long n = 0; n < steps; ++n) {
      const Mat& mtx = ode[mode(n)];
      auto rhs = [&](const Vec& xs) { return Vec(mtx * mdl.f.apply(xs)); };
      const Vec k1 = rhs(x);
      const Vec k2 = rhs(x + 0.5 * h * k1);
      const Vec k3 = rhs(x + 0.5 * h * k2);
      const Vec k4 = rhs(x + h * k3);
      const Vec xn = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (escaped(xn)) {
        run.diverged = true;
        break;
      }
      const Vec xm = hermite_mid(x, xn, k1, rhs(xn), h, opt.interpolation_order);
      const Vec fm = gain[mode(n)] * mdl.f.apply(xm);
      const Vec fx = mdl.f.apply(xn);
      const Vec yl = gain[mode(n)] * fx;
      const Vec yr = gain[mode(n + 1)] * fx;
      if (escaped(yr) || escaped(yl)) {
        run.diverged = true;
        break;
      }
      run.track.push(fm);
      run.track.push(yl, yr);
      x = xn;
      run.x.push_back(x);
      run.y.push_back(yr);
    }
    return run;
  }

  const double half = 0.5 * h;
  run.track = HistoryBuffer(mdl.m, h, -2L * k);
  for (long i = -2L * k; i < 0; ++i) run.track.push(y0(static_cast<double>(i) * half));
  {
    const std::size_t s = mode(0);
    const Vec yr = mdl.c[s] * mdl.f.apply(x) + mdl.d[s] * run.track.right(-2L * k);
    run.track.push(y0(0.0), yr);
    run.y.push_back(yr);
  }
  for (long n = 0; n < steps; ++n) {
    const std::size_t s = mode(n);
    const long base = 2 * (n - k);
    const Vec& yd0 = run.track.right(base);
    const Vec& yd1 = run.track.left(base + 1);
    const Vec& yd2 = run.track.left(base + 2);
    auto rhs = [&](const Vec& xs, const Vec& yd) { return Vec(mdl.a[s] * mdl.f.apply(xs) + mdl.b[s] * yd); };
    const Vec k1 = rhs(x, yd0);
    const Vec k2 = rhs(x + half * k1, yd1);
    const Vec k3 = rhs(x + half * k2, yd1);
    const Vec k4 = rhs(x + h * k3, yd2);
    const Vec xn = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (escaped(xn)) {
      run.diverged = true;
      break;
    }
    const Vec xm = hermite_mid(x, xn, k1, rhs(xn, yd2), h, opt.interpolation_order);
    const Vec ym = mdl.c[s] * mdl.f.apply(xm) + mdl.d[s] * yd1;
    const Vec fx = mdl.f.apply(xn);
    const Vec yl = mdl.c[s] * fx + mdl.d[s] * yd2;
    const std::size_t s1 = mode(n + 1);
    const Vec yr = mdl.c[s1] * fx + mdl.d[s1] * run.track.right(base + 2);
    if (escaped(yl) || escaped(yr) || escaped(ym)) {
      run.diverged = true;
      break;
    }
    run.track.push(ym);
    run.track.push(yl, yr);
    x = xn;
    run.x.push_back(x);
    run.y.push_back(yr);
  }
  return run;
}

void fill_times(Trajectory& traj, std::size_t count, double h) {
  traj.t.resize(count);
  for (std::size_t i = 0; i < count; ++i) traj.t[i] = static_cast<double>(i) * h;
}

}  // namespace

HistoryBuffer::HistoryBuffer(int dim, double h, long first) : dim_(dim), h_(h), first_(first) {}

void HistoryBuffer::push(const Vec& left, const Vec& right) {
  if (left.size() != dim_ || right.size() != dim_) throw DimensionError("HistoryBuffer: wrong dimension");
  left_.push_back(left);
  right_.push_back(right);
}

std::size_t HistoryBuffer::slot(long i) const {
  if (i < first_ || i > last()) {
    throw Error("HistoryBuffer: index " + std::to_string(i) + " outside [" + std::to_string(first_) +
                ", " + std::to_string(last()) + "]");
  }
  return static_cast<std::size_t>(i - first_);
}

InitialHistory InitialHistory::constant(Vec c) {
  return InitialHistory([c = std::move(c)](double) { return c; });
}

InitialHistory InitialHistory::piecewise_linear(std::vector<double> times, std::vector<Vec> values) {
  if (times.empty() || times.size() != values.size()) {
    throw Error("InitialHistory: need one value per knot");
  }
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw Error("InitialHistory: knots must increase");
  return InitialHistory([times = std::move(times), values = std::move(values)](double th) -> Vec {
    if (th <= times.front()) return values.front();
    if (th >= times.back()) return values.back();
    const auto it = std::upper_bound(times.begin(), times.end(), th);
    const auto j = static_cast<std::size_t>(it - times.begin());
    const double w = (th - times[j - 1]) / (times[j] - times[j - 1]);
    return (1.0 - w) * values[j - 1] + w * values[j];
  });
}

InitialHistory InitialHistory::random(int dim, double span, std::mt19937_64& rng, int pieces,
                                      double amplitude, bool nonnegative) {
  std::uniform_real_distribution<double> u(nonnegative ? 0.0 : -amplitude, amplitude);
  auto draw = [&] {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = u(rng);
    return v;
  };
  if (!(span > 0.0) || pieces < 1) return constant(draw());
  std::vector<double> times;
  std::vector<Vec> values;
  for (int j = 0; j <= pieces; ++j) {
    times.push_back(-span + span * j / pieces);
    values.push_back(draw());
  }
  times.back() = 0.0;
  return piecewise_linear(std::move(times), std::move(values));
}

Trajectory simulate_switched_delay(const SwitchedDelaySystem& sys, const Nonlinearity& f,
                                   const SwitchingSignal& sigma, const InitialHistory& phi,
                                   const SimOptions& opt) {
  check_order(opt.interpolation_order);
  if (f.dim() != sys.n) throw DimensionError("simulation: nonlinearity has wrong dimension");
  Trajectory traj;
  traj.cls = SystemClass::kSwitchedDelay;
  traj.h = opt.step;
  traj.nonlinearity = f.name();
  const double h = opt.step;
  const double half = 0.5 * h;
  const long steps = checked_steps(opt.horizon, h, traj.warnings);
  int kmax = 0;
  for (double tau : sys.delays) {
    traj.delay_steps.push_back(snap_delay(tau, h, traj.warnings));
    kmax = std::max(kmax, traj.delay_steps.back());
  }
  const auto modes = step_modes(sigma, steps, h, sys.modes(), traj.warnings);

  traj.track = HistoryBuffer(sys.n, h, -2L * kmax);
  for (long i = -2L * kmax; i <= 0; ++i) traj.track.push(phi(static_cast<double>(i) * half));
  Vec x = traj.track.left(0);
  traj.x.push_back(x);

  for (long n = 0; n < steps; ++n) {
    const auto s = static_cast<std::size_t>(modes[static_cast<std::size_t>(n)]);
    auto rhs = [&](const Vec& xs, int stage) {
      Vec d = sys.a[s] * f.apply(xs);
      for (std::size_t r = 0; r < sys.b.size(); ++r) {
        const int k = traj.delay_steps[r];
        d += sys.b[r][s] * (k == 0 ? f.apply(xs) : f.apply(traj.track.left(2 * (n - k) + stage)));
      }
      return d;
    };
    const Vec k1 = rhs(x, 0);
    const Vec k2 = rhs(x + half * k1, 1);
    const Vec k3 = rhs(x + half * k2, 1);
    const Vec k4 = rhs(x + h * k3, 2);
    const Vec xn = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (escaped(xn)) {
      traj.diverged = true;
      break;
    }
    traj.track.push(hermite_mid(x, xn, k1, rhs(xn, 2), h, opt.interpolation_order));
    traj.track.push(xn);
    x = xn;
    traj.x.push_back(x);
  }
  fill_times(traj, traj.x.size(), h);
  traj.mode.assign(modes.begin(), modes.begin() + static_cast<long>(traj.x.size()));
  return traj;
}

Trajectory simulate_coupled(const CoupledSystem& sys, const Nonlinearity& f,
                            const SwitchingSignal& sigma, const Vec& x0, const InitialHistory& y0,
                            const SimOptions& opt) {
  const CoupledModel mdl{sys.n, sys.m, sys.a, sys.b, sys.c, sys.d, f};
  auto run = run_coupled(mdl, sigma, x0, [&](double th) { return y0(th); }, sys.delay, opt);
  Trajectory traj;
  traj.cls = sys.modes() == 1 ? SystemClass::kCoupled : SystemClass::kSwitchedCoupled;
  traj.h = opt.step;
  traj.nonlinearity = f.name();
  traj.x = std::move(run.x);
  traj.y = std::move(run.y);
  traj.track = std::move(run.track);
  traj.delay_steps = {run.k};
  traj.diverged = run.diverged;
  traj.warnings = std::move(run.warnings);
  fill_times(traj, traj.x.size(), opt.step);
  traj.mode.assign(run.modes.begin(), run.modes.begin() + static_cast<long>(traj.x.size()));
  return traj;
}

Trajectory simulate_neutral(const NeutralSystem& sys, const SwitchingSignal& sigma,
                            const InitialHistory& phi, const SimOptions& opt) {
  CoupledModel mdl;
  mdl.n = mdl.m = sys.n;
  mdl.f = Nonlinearity::identity(sys.n);
  for (int s = 0; s < sys.modes(); ++s) {
    mdl.a.push_back(sys.a[static_cast<std::size_t>(s)]);
    mdl.b.push_back(sys.reduced_b(s));
    mdl.c.push_back(Mat::Identity(sys.n, sys.n));
    mdl.d.push_back(sys.d);
  }
  std::vector<std::string> scratch;
  const double tau = static_cast<double>(snap_delay(sys.delay, opt.step, scratch)) * opt.step;
  const Vec y_start = phi(0.0) - sys.d * phi(-tau);
  auto run = run_coupled(mdl, sigma, y_start, [&](double th) { return phi(th); }, sys.delay, opt);
  Trajectory traj;
  traj.cls = SystemClass::kNeutral;
  traj.h = opt.step;
  traj.nonlinearity = "identity";
  traj.y = std::move(run.x);
  for (std::size_t i = 0; i < traj.y.size(); ++i)
    traj.x.push_back(run.track.right(2 * static_cast<long>(i)));
  traj.track = std::move(run.track);
  traj.delay_steps = {run.k};
  traj.diverged = run.diverged;
  traj.warnings = std::move(run.warnings);
  fill_times(traj, traj.x.size(), opt.step);
  traj.mode.assign(run.modes.begin(), run.modes.begin() + static_cast<long>(traj.x.size()));
  return traj;
}

Trajectory simulate_discrete(const DiscreteDelaySystem& sys, const Nonlinearity& f,
                             const std::vector<int>& modes, const std::vector<Vec>& window,
                             int steps) {
  const int big_m = sys.max_delay();
  if (static_cast<int>(window.size()) != big_m + 1) {
    throw DimensionError("simulate_discrete: window must hold max_delay + 1 samples");
  }
  if (f.dim() != sys.n) throw DimensionError("simulation: nonlinearity has wrong dimension");
  if (modes.empty()) throw Error("simulate_discrete: empty mode sequence");
  for (int s : modes)
    if (s < 0 || s >= sys.modes()) throw Error("simulate_discrete: mode out of range");
  if (steps < 0) throw Error("simulate_discrete: negative step count");
  for (const Vec& w : window)
    if (w.size() != sys.n) throw DimensionError("simulate_discrete: window sample has wrong dimension");

  Trajectory traj;
  traj.cls = SystemClass::kDiscrete;
  traj.h = 1.0;
  traj.nonlinearity = f.name();
  traj.delay_steps = sys.delays;
  traj.prehistory.assign(window.begin(), window.end() - 1);
  // fx[j] = f(x(j - M)).
  std::vector<Vec> fx;
  for (const Vec& w : window) fx.push_back(f.apply(w));
  traj.x.push_back(window.back());
  auto mode_of = [&](int k) { return modes[static_cast<std::size_t>(std::min<int>(k, static_cast<int>(modes.size()) - 1))]; };
  for (int k = 0; k < steps; ++k) {
    const auto s = static_cast<std::size_t>(mode_of(k));
    const std::size_t now = static_cast<std::size_t>(k + big_m);
    Vec next = sys.a[s] * fx[now];
    for (std::size_t l = 0; l < sys.b.size(); ++l)
      next += sys.b[l][s] * fx[now - static_cast<std::size_t>(sys.delays[l])];
    if (escaped(next)) {
      traj.diverged = true;
      break;
    }
    traj.x.push_back(next);
    fx.push_back(f.apply(next));
  }
  fill_times(traj, traj.x.size(), 1.0);
  for (std::size_t k = 0; k < traj.x.size(); ++k) traj.mode.push_back(mode_of(static_cast<int>(k)));
  return traj;
}

void write_csv(const Trajectory& traj, std::ostream& out) {
  out << "t,mode";
  const Eigen::Index n = traj.x.empty() ? 0 : traj.x.front().size();
  const Eigen::Index m = traj.y.empty() ? 0 : traj.y.front().size();
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x_" << i;
  for (Eigen::Index i = 1; i <= m; ++i) out << ",y_" << i;
  out << "\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (std::size_t k = 0; k < traj.x.size(); ++k) {
    put(traj.t[k]);
    out << "," << traj.mode[k] + 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      out << ",";
      put(traj.x[k](i));
    }
    for (Eigen::Index i = 0; i < m && k < traj.y.size(); ++i) {
      out << ",";
      put(traj.y[k](i));
    }
    out << "\n";
  }
}

}  // namespace krasovskii
