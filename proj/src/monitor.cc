#include "krasovskii/monitor.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <thread>

namespace krasovskii {
namespace {

constexpr std::size_t kStoredViolations = 20;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ∫ |linear interpolant from a to b| over a sub-interval of width w.
double abs_linear(double a, double b, double w) {
  if ((a >= 0.0 && b >= 0.0) || (a <= 0.0 && b <= 0.0)) return 0.5 * w * (std::abs(a) + std::abs(b));
  return 0.5 * w * (a * a + b * b) / (std::abs(a) + std::abs(b));
}

Vec sub_interval(const HistoryBuffer& buf, long i, const Nonlinearity* f) {
  const Vec a = f ? f->apply(buf.right(i)) : buf.right(i);
  const Vec b = f ? f->apply(buf.left(i + 1)) : buf.left(i + 1);
  const double w = 0.5 * buf.h();
  Vec out(a.size());
  for (Eigen::Index j = 0; j < a.size(); ++j) out(j) = abs_linear(a(j), b(j), w);
  return out;
}

// Prefix sums of window_integral over the whole buffer.
class PrefixIntegral {
 public:
  PrefixIntegral(const HistoryBuffer& buf, const Nonlinearity* f) : first_(buf.first()) {
    sums_.push_back(Vec::Zero(buf.dim()));
    for (long i = buf.first(); i < buf.last(); ++i) sums_.push_back(sums_.back() + sub_interval(buf, i, f));
  }
  Vec between(long from, long to) const {
    return sums_[static_cast<std::size_t>(to - first_)] - sums_[static_cast<std::size_t>(from - first_)];
  }

 private:
  long first_;
  std::vector<Vec> sums_;
};

bool same_family(SystemClass a, SystemClass b) {
  auto coupled = [](SystemClass c) {
    return c == SystemClass::kCoupled || c == SystemClass::kSwitchedCoupled;
  };
  return a == b || (coupled(a) && coupled(b));
}

void record(MonitorReport& rep, long step, double t, double v0, double v1, double excess,
            const char* kind) {
  rep.worst = std::max(rep.worst, excess);
  if (excess <= 0.0) return;
  ++rep.violation_count;
  if (rep.violations.size() < kStoredViolations) rep.violations.push_back({step, t, v0, v1, excess, kind});
}

std::vector<long> rate_steps(long steps, int count, std::uint64_t seed) {
  std::vector<long> idx(static_cast<std::size_t>(steps));
  std::iota(idx.begin(), idx.end(), 0L);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(std::max(count, 0))));
  std::sort(idx.begin(), idx.end());
  return idx;
}

SwitchingSignal grid_signal(std::mt19937_64& rng, int modes, const ScenarioOptions& opt) {
  if (modes == 1) return SwitchingSignal::constant(0);
  std::uniform_real_distribution<double> dwell(opt.dwell_min, opt.dwell_max);
  std::uniform_int_distribution<int> mode(0, modes - 1);
  std::vector<double> bps{0.0};
  std::vector<int> ms{mode(rng)};
  double t = dwell(rng);
  while (t < opt.horizon) {
    const double snapped = std::max(1.0, std::round(t / opt.step)) * opt.step;
    if (snapped > bps.back()) {
      bps.push_back(snapped);
      ms.push_back(mode(rng));
    }
    t += dwell(rng);
  }
  return SwitchingSignal(std::move(bps), std::move(ms));
}

Vec random_vector(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

}  // namespace

Vec window_integral(const HistoryBuffer& buf, long from, long to, const Nonlinearity* f) {
  Vec out = Vec::Zero(buf.dim());
  for (long i = from; i < to; ++i) out += sub_interval(buf, i, f);
  return out;
}

double eval_V_switched(const Certificate& cert, const HistoryBuffer& x_hist, long k,
                       const std::vector<int>& delay_steps, const Nonlinearity& f) {
  if (delay_steps.size() != cert.mu.size()) throw DimensionError("eval_V_switched: one μ per delay");
  double v = cert.nu.dot(x_hist.left(2 * k).cwiseAbs());
  for (std::size_t r = 0; r < delay_steps.size(); ++r)
    v += cert.mu[r].dot(window_integral(x_hist, 2 * (k - delay_steps[r]), 2 * k, &f));
  return v;
}

double eval_V_coupled(const Certificate& cert, const Vec& x, const HistoryBuffer& y_hist, long k,
                      int delay_steps) {
  return cert.nu.dot(x.cwiseAbs()) +
         cert.mu.at(0).dot(window_integral(y_hist, 2 * (k - delay_steps), 2 * k));
}

double eval_V_neutral(const Certificate& cert, const HistoryBuffer& x_hist, long k, int delay_steps,
                      const Mat& d) {
  const Vec y = x_hist.right(2 * k) - d * x_hist.right(2 * (k - delay_steps));
  return cert.nu.dot(y.cwiseAbs()) +
         cert.mu.at(0).dot(window_integral(x_hist, 2 * (k - delay_steps), 2 * k));
}

double eval_V_discrete(const Certificate& cert, const std::vector<Vec>& window,
                       const std::vector<int>& delays, const Nonlinearity& f) {
  if (delays.size() != cert.mu.size()) throw DimensionError("eval_V_discrete: one μ per delay");
  if (window.empty()) throw Error("eval_V_discrete: empty window");
  const long last = static_cast<long>(window.size()) - 1;
  double v = cert.nu.dot(window.back().cwiseAbs());
  for (std::size_t l = 0; l < delays.size(); ++l) {
    if (delays[l] > last) throw Error("eval_V_discrete: window shorter than the delay");
    for (int i = 1; i <= delays[l]; ++i)
      v += cert.mu[l].dot(f.apply(window[static_cast<std::size_t>(last - i)]).cwiseAbs());
  }
  return v;
}

MonitorReport check_decrease(const SystemDescriptor& sys, const Trajectory& traj,
                             const Certificate& cert, const Nonlinearity& f,
                             const MonitorOptions& opt) {
  if (cert.cls != sys.cls || !same_family(traj.cls, sys.cls)) {
    throw CertificationError(FailureReason::kClassMismatch,
                             "trajectory, certificate and system classes differ");
  }
  MonitorReport rep;
  rep.cls = sys.cls;
  rep.diverged = traj.diverged;
  rep.worst = -std::numeric_limits<double>::infinity();
  const long steps = static_cast<long>(traj.size()) - 1;

  if (sys.cls == SystemClass::kDiscrete) {
    std::vector<Vec> all = traj.prehistory;
    all.insert(all.end(), traj.x.begin(), traj.x.end());
    const long big_m = static_cast<long>(traj.prehistory.size());
    for (long k = 0; k <= steps; ++k) {
      const std::vector<Vec> window(all.begin() + (k), all.begin() + (k + big_m + 1));
      rep.v.push_back(eval_V_discrete(cert, window, traj.delay_steps, f));
    }
    for (long k = 0; k < steps; ++k) {
      const double dv = rep.v[static_cast<std::size_t>(k + 1)] - rep.v[static_cast<std::size_t>(k)];
      rep.margins.push_back(dv);
      record(rep, k, traj.t[static_cast<std::size_t>(k)], rep.v[static_cast<std::size_t>(k)],
             rep.v[static_cast<std::size_t>(k + 1)], dv - opt.tol_discrete, "monotone");
    }
    rep.pass = rep.violation_count == 0 && !rep.diverged;
    if (steps == 0) rep.worst = 0.0;
    return rep;
  }

  // Functional value and the rate weight S at each grid index.
  std::vector<double> s_weight;
  std::vector<double> state_size;
  switch (sys.cls) {
    case SystemClass::kSwitchedDelay: {
      const PrefixIntegral prefix(traj.track, &f);
      for (long k = 0; k <= steps; ++k) {
        const Vec& x = traj.x[static_cast<std::size_t>(k)];
        double v = cert.nu.dot(x.cwiseAbs());
        for (std::size_t r = 0; r < traj.delay_steps.size(); ++r)
          v += cert.mu.at(r).dot(prefix.between(2 * (k - traj.delay_steps[r]), 2 * k));
        rep.v.push_back(v);
        s_weight.push_back(f.apply(x).cwiseAbs().sum());
        state_size.push_back(x.norm());
      }
      break;
    }
    case SystemClass::kCoupled:
    case SystemClass::kSwitchedCoupled: {
      const PrefixIntegral prefix(traj.track, nullptr);
      const long kd = traj.delay_steps.at(0);
      for (long k = 0; k <= steps; ++k) {
        const Vec& x = traj.x[static_cast<std::size_t>(k)];
        rep.v.push_back(cert.nu.dot(x.cwiseAbs()) + cert.mu.at(0).dot(prefix.between(2 * (k - kd), 2 * k)));
        s_weight.push_back(f.apply(x).cwiseAbs().sum());
        state_size.push_back(x.norm());
      }
      break;
    }
    case SystemClass::kNeutral: {
      const PrefixIntegral prefix(traj.track, nullptr);
      const long kd = traj.delay_steps.at(0);
      for (long k = 0; k <= steps; ++k) {
        const Vec& y = traj.y[static_cast<std::size_t>(k)];
        rep.v.push_back(cert.nu.dot(y.cwiseAbs()) + cert.mu.at(0).dot(prefix.between(2 * (k - kd), 2 * k)));
        s_weight.push_back(y.cwiseAbs().sum());
        state_size.push_back(y.norm());
      }
      break;
    }
    case SystemClass::kDiscrete:
      break;
  }

  const double h = traj.h;
  auto allowed = [&](long k) { return opt.tol_mono * std::max(1.0, rep.v[static_cast<std::size_t>(k)]); };
  for (long k = 0; k < steps; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double dv = rep.v[i + 1] - rep.v[i];
    rep.margins.push_back(dv / h);
    record(rep, k, traj.t[i], rep.v[i], rep.v[i + 1], dv - allowed(k), "monotone");
  }
  for (long k : rate_steps(steps, opt.rate_checks, opt.seed)) {
    const auto i = static_cast<std::size_t>(k);
    if (std::max(state_size[i], state_size[i + 1]) < opt.near_origin) {
      ++rep.rate_skipped;
      continue;
    }
    ++rep.rate_checked;
    const double dv = rep.v[i + 1] - rep.v[i];
    const double bound = -0.5 * cert.beta * h * std::min(s_weight[i], s_weight[i + 1]) + allowed(k);
    record(rep, k, traj.t[i], rep.v[i], rep.v[i + 1], dv - bound, "rate");
  }
  if (steps == 0) rep.worst = 0.0;
  rep.pass = rep.violation_count == 0 && !rep.diverged;
  return rep;
}

DiscreteDelta discrete_delta(const DiscreteDelaySystem& sys, const Certificate& cert,
                             const Trajectory& traj, const Nonlinearity& f, long k) {
  std::vector<Vec> all = traj.prehistory;
  all.insert(all.end(), traj.x.begin(), traj.x.end());
  const long big_m = static_cast<long>(traj.prehistory.size());
  if (k < 0 || k + 1 >= static_cast<long>(traj.size())) throw Error("discrete_delta: step out of range");
  auto x_at = [&](long j) -> const Vec& { return all[static_cast<std::size_t>(j + big_m)]; };
  const std::vector<Vec> w0(all.begin() + k, all.begin() + k + big_m + 1);
  const std::vector<Vec> w1(all.begin() + k + 1, all.begin() + k + big_m + 2);

  DiscreteDelta out;
  out.delta_v = eval_V_discrete(cert, w1, sys.delays, f) - eval_V_discrete(cert, w0, sys.delays, f);
  const auto s = static_cast<std::size_t>(traj.mode[static_cast<std::size_t>(k)]);
  const Vec fk = f.apply(x_at(k)).cwiseAbs();
  const Vec& nu = cert.nu;
  const Mat eye = Mat::Identity(sys.n, sys.n);
  Vec mu_sum = Vec::Zero(sys.n);
  Vec image = sys.a[s] * fk;
  double delayed_exact = 0.0;
  double delayed_bound = 0.0;
  for (std::size_t l = 0; l < sys.b.size(); ++l) {
    const Vec fl = f.apply(x_at(k - sys.delays[l])).cwiseAbs();
    mu_sum += cert.mu[l];
    image += sys.b[l][s] * fl;
    delayed_exact -= cert.mu[l].dot(fl);
    delayed_bound += (sys.b[l][s].transpose() * nu - cert.mu[l]).dot(fl);
  }
  const double common = -nu.dot(x_at(k).cwiseAbs()) + mu_sum.dot(fk) + delayed_exact;
  out.exact = nu.dot(x_at(k + 1).cwiseAbs()) + common;
  out.triangle = nu.dot(image) + common;
  out.bound = ((sys.a[s] - eye).transpose() * nu + mu_sum).dot(fk) + delayed_bound;
  return out;
}

SystemDescriptor with_scenario_delays(const SystemDescriptor& sys, const Scenario& sc) {
  SystemDescriptor out = sys;
  std::visit(
      [&](auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SwitchedDelaySystem>) {
          s.delays = sc.delays;
        } else if constexpr (std::is_same_v<T, CoupledSystem> || std::is_same_v<T, NeutralSystem>) {
          s.delay = sc.delays.at(0);
        }
      },
      out.system);
  return out;
}

Scenario make_scenario(const SystemDescriptor& sys, std::uint64_t seed, int index,
                       const ScenarioOptions& opt) {
  Scenario sc;
  sc.index = index;
  sc.seed = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(index)));
  std::mt19937_64 rng(sc.seed);
  const int n = sys.state_dim();
  const int modes = sys.modes();
  const bool plain = index == 0 && opt.identity_first;
  const bool discrete = sys.cls == SystemClass::kDiscrete;

  sc.f = plain || sys.cls == SystemClass::kNeutral ? Nonlinearity::identity(n)
                                                   : random_nonlinearity(n, rng, discrete);
  if (discrete) {
    const auto& s = std::get<DiscreteDelaySystem>(sys.system);
    std::uniform_int_distribution<int> mode(0, modes - 1);
    for (int k = 0; k < opt.discrete_steps; ++k) sc.discrete_modes.push_back(mode(rng));
    for (int j = 0; j <= s.max_delay(); ++j) sc.window.push_back(plain ? Vec::Ones(n) : random_vector(rng, n));
    return sc;
  }

  std::vector<double> own;
  int m = n;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SwitchedDelaySystem>) {
          own = s.delays;
        } else if constexpr (std::is_same_v<T, CoupledSystem>) {
          own = {s.delay};
          m = s.m;
        } else if constexpr (std::is_same_v<T, NeutralSystem>) {
          own = {s.delay};
        }
      },
      sys.system);
  if (plain) {
    sc.delays = own;
  } else {
    std::uniform_real_distribution<double> tau(0.0, opt.max_delay);
    for (std::size_t r = 0; r < own.size(); ++r) sc.delays.push_back(std::round(tau(rng) / opt.step) * opt.step);
  }
  sc.sigma = grid_signal(rng, modes, opt);
  const double span = std::max(opt.step, *std::max_element(sc.delays.begin(), sc.delays.end()));
  const int hist_dim = sys.cls == SystemClass::kSwitchedCoupled || sys.cls == SystemClass::kCoupled ? m : n;
  if (plain) {
    sc.history = InitialHistory::constant(Vec::Ones(hist_dim));
    sc.x0 = Vec::Ones(n);
  } else {
    sc.history = InitialHistory::random(hist_dim, span, rng, 4, 1.0, false);
    sc.x0 = random_vector(rng, n);
  }
  return sc;
}

Trajectory run_scenario(const SystemDescriptor& sys, const Scenario& sc, const ScenarioOptions& opt) {
  SimOptions sim;
  sim.horizon = opt.horizon;
  sim.step = opt.step;
  const SystemDescriptor run = with_scenario_delays(sys, sc);
  Trajectory traj;
  switch (sys.cls) {
    case SystemClass::kSwitchedDelay:
      traj = simulate_switched_delay(std::get<SwitchedDelaySystem>(run.system), sc.f, sc.sigma, sc.history, sim);
      break;
    case SystemClass::kCoupled:
    case SystemClass::kSwitchedCoupled:
      traj = simulate_coupled(std::get<CoupledSystem>(run.system), sc.f, sc.sigma, sc.x0, sc.history, sim);
      break;
    case SystemClass::kNeutral:
      traj = simulate_neutral(std::get<NeutralSystem>(run.system), sc.sigma, sc.history, sim);
      break;
    case SystemClass::kDiscrete:
      traj = simulate_discrete(std::get<DiscreteDelaySystem>(run.system), sc.f, sc.discrete_modes, sc.window,
                               opt.discrete_steps);
      break;
  }
  traj.seed = sc.seed;
  return traj;
}

double state_norm(const Trajectory& traj, long k) {
  const auto i = static_cast<std::size_t>(k);
  if (traj.cls == SystemClass::kDiscrete) {
    const long big_m = static_cast<long>(traj.prehistory.size());
    double out = 0.0;
    for (long j = k - big_m; j <= k; ++j)
      out = std::max(out, j < 0 ? traj.prehistory[static_cast<std::size_t>(j + big_m)].norm()
                                : traj.x[static_cast<std::size_t>(j)].norm());
    return out;
  }
  const int kd = traj.delay_steps.empty() ? 0 : *std::max_element(traj.delay_steps.begin(), traj.delay_steps.end());
  double out = traj.cls == SystemClass::kNeutral ? traj.y[i].norm() : traj.x[i].norm();
  for (long j = 2 * (k - kd); j <= 2 * k; ++j)
    out = std::max({out, traj.track.left(j).norm(), traj.track.right(j).norm()});
  return out;
}

int default_threads() {
  if (const char* env = std::getenv("KRASOVSKII_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min<long>(v, 256));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

FalsifyResult falsify(const SystemDescriptor& sys, const FalsifyOptions& opt) {
  if (opt.budget < 1) throw Error("falsify: budget must be at least 1");
  FalsifyResult res;
  res.outcomes.resize(static_cast<std::size_t>(opt.budget));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < opt.budget; i = next++) {
      const Scenario sc = make_scenario(sys, opt.seed, i, opt.scenario);
      const Trajectory traj = run_scenario(sys, sc, opt.scenario);
      ScenarioOutcome& out = res.outcomes[static_cast<std::size_t>(i)];
      out.index = i;
      out.seed = sc.seed;
      out.nonlinearity = sc.f.name();
      out.delays = sc.delays;
      if (sys.cls == SystemClass::kDiscrete) {
        const auto& s = std::get<DiscreteDelaySystem>(sys.system);
        out.delays.assign(s.delays.begin(), s.delays.end());
      }
      out.diverged = traj.diverged;
      out.initial_norm = state_norm(traj, 0);
      out.terminal_norm = state_norm(traj, static_cast<long>(traj.size()) - 1);
      out.ratio = out.initial_norm > 0.0 ? out.terminal_norm / out.initial_norm : 0.0;
    }
  };
  const int threads = std::min(opt.threads > 0 ? opt.threads : default_threads(), opt.budget);
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const ScenarioOutcome* best = nullptr;
  for (const auto& o : res.outcomes) {
    const bool better = !best || (o.diverged && !best->diverged) ||
                        (o.diverged == best->diverged && o.ratio > best->ratio);
    if (better) best = &o;
  }
  if (best && (best->ratio > 1.0 || best->diverged)) {
    res.best = *best;
    res.best_trajectory = run_scenario(sys, make_scenario(sys, opt.seed, best->index, opt.scenario), opt.scenario);
  }
  return res;
}

}  // namespace krasovskii
