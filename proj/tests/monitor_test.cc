#include <gtest/gtest.h>

#include "krasovskii/monitor.h"
#include "random_systems.h"
#include "test_util.h"

using namespace krasovskii;
using namespace krasovskii::testing;

namespace {

SimOptions options(double horizon, double step) {
  SimOptions o;
  o.horizon = horizon;
  o.step = step;
  return o;
}

SwitchedDelaySystem example1() {
  SwitchedDelaySystem s;
  s.n = 2;
  const Mat a = mat({{-2, 0}, {0, -2}});
  s.a = {a, a};
  s.b = {{mat({{1, 1}, {1, 0}}), mat({{0, 1}, {3, 0}})}};
  s.delays = {1.0};
  return s;
}

CoupledSystem scalar_coupled(double a, double b, double c, double d, double delay) {
  CoupledSystem s;
  s.n = s.m = 1;
  s.a = {mat({{a}})};
  s.b = {mat({{b}})};
  s.c = {mat({{c}})};
  s.d = {mat({{d}})};
  s.delay = delay;
  return s;
}

NeutralSystem scalar_neutral(double a, double d, double g) {
  NeutralSystem s;
  s.n = 1;
  s.a = {mat({{a}})};
  s.g = {mat({{g}})};
  s.d = mat({{d}});
  s.delay = 1.0;
  return s;
}

DiscreteDelaySystem scalar_discrete(double a, double b, int delay) {
  DiscreteDelaySystem s;
  s.n = 1;
  s.a = {mat({{a}})};
  s.b = {{mat({{b}})}};
  s.delays = {delay};
  return s;
}

}  // namespace

TEST(WindowIntegral, ConstantAndSignChange) {
  HistoryBuffer buf(1, 0.1, -4);
  for (int i = 0; i < 5; ++i) buf.push(vec({2.0}));
  EXPECT_NEAR(window_integral(buf, -4, 0)(0), 0.4, 1e-15);

  HistoryBuffer flip(1, 0.1, 0);
  flip.push(vec({1.0}));
  flip.push(vec({-1.0}));
  // |linear| from 1 to -1 over width h/2 integrates to h/4, not zero.
  EXPECT_NEAR(window_integral(flip, 0, 1)(0), 0.025, 1e-15);
}

TEST(WindowIntegral, UsesOneSidedLimitsAtJumps) {
  HistoryBuffer buf(1, 1.0, 0);
  buf.push(vec({0.0}), vec({2.0}));
  buf.push(vec({2.0}), vec({0.0}));
  EXPECT_DOUBLE_EQ(window_integral(buf, 0, 1)(0), 1.0);
}

TEST(Functional, Example1ConstantHistory) {
  const auto sys = example1();
  const auto cert = build_switched_delay(sys, vec({7, 4}));
  const auto f = Nonlinearity::identity(2);
  const auto traj = simulate_switched_delay(sys, f, SwitchingSignal::constant(0),
                                            InitialHistory::constant(vec({1, 1})), options(1.0, 0.01));
  // νᵀ|c| + τ μᵀ|c| = 11 + 20.
  EXPECT_NEAR(eval_V_switched(cert, traj.track, 0, traj.delay_steps, f), 31.0, 1e-12);
}

TEST(Functional, ZeroHistoryGivesZero) {
  const auto sys = example1();
  const auto cert = build_switched_delay(sys, vec({7, 4}));
  const auto f = Nonlinearity::identity(2);
  const auto traj = simulate_switched_delay(sys, f, SwitchingSignal::constant(0),
                                            InitialHistory::constant(Vec::Zero(2)), options(2.0, 0.01));
  for (long k = 0; k < static_cast<long>(traj.size()); k += 50)
    EXPECT_EQ(eval_V_switched(cert, traj.track, k, traj.delay_steps, f), 0.0);
}

TEST(Functional, CoupledAndNeutralConstantHistory) {
  const auto cs = scalar_coupled(-3, 1, 1, 0.25, 0.5);
  const auto cc = build_coupled(cs);
  const auto ct = simulate_coupled(cs, Nonlinearity::identity(1), SwitchingSignal::constant(0), vec({2}),
                                   InitialHistory::constant(vec({1})), options(1.0, 0.01));
  EXPECT_NEAR(eval_V_coupled(cc, ct.x[0], ct.track, 0, ct.delay_steps[0]),
              2 * cc.nu(0) + 0.5 * cc.mu[0](0), 1e-12);

  const auto ns = scalar_neutral(-2, 0.25, 0.1);
  const auto nc = build_neutral(ns);
  const auto nt = simulate_neutral(ns, SwitchingSignal::constant(0), InitialHistory::constant(vec({1})),
                                   options(1.0, 0.01));
  EXPECT_NEAR(eval_V_neutral(nc, nt.track, 0, nt.delay_steps[0], ns.d), 0.75 * nc.nu(0) + nc.mu[0](0),
              1e-12);
}

TEST(Functional, Discrete) {
  const auto sys = scalar_discrete(0.3, 0.4, 1);
  const auto cert = build_discrete(sys);
  ASSERT_NEAR(cert.nu(0), 1.0, 1e-12);
  ASSERT_NEAR(cert.mu[0](0), 0.55, 1e-12);
  EXPECT_NEAR(eval_V_discrete(cert, {vec({1}), vec({1})}, sys.delays, Nonlinearity::identity(1)), 1.55,
              1e-12);
  EXPECT_NEAR(eval_V_discrete(cert, {vec({-2}), vec({0.5})}, sys.delays, Nonlinearity::identity(1)), 1.6,
              1e-12);
}

TEST(CheckDecrease, Example1Switching) {
  const SystemDescriptor desc{SystemClass::kSwitchedDelay, example1(), {}};
  const auto cert = certify(desc);
  const auto f = Nonlinearity::identity(2);
  const SwitchingSignal sigma({0.0, 0.5, 1.3, 2.0}, {0, 1, 0, 1});
  const auto traj = simulate_switched_delay(std::get<SwitchedDelaySystem>(desc.system), f, sigma,
                                            InitialHistory::constant(vec({1, -1})), options(10.0, 0.01));
  const auto rep = check_decrease(desc, traj, cert, f);
  EXPECT_TRUE(rep.pass) << rep.worst;
  EXPECT_EQ(rep.rate_checked + rep.rate_skipped, 100);
  EXPECT_LT(rep.v.back(), rep.v.front());
}

TEST(CheckDecrease, CoupledCertifiedPassesForgedFails) {
  const SystemDescriptor good{SystemClass::kCoupled, scalar_coupled(-3, 1, 1, 0.25, 0.1), {}};
  const auto cert = certify(good);
  const auto f = Nonlinearity::identity(1);
  const auto traj = simulate_coupled(std::get<CoupledSystem>(good.system), f, SwitchingSignal::constant(0),
                                     vec({1}), InitialHistory::constant(vec({1})), options(20.0, 0.01));
  EXPECT_TRUE(check_decrease(good, traj, cert, f).pass);

  const SystemDescriptor probe{SystemClass::kCoupled, scalar_coupled(-1, 1, 1, 0.5, 0.5), {}};
  Certificate forged;
  forged.cls = SystemClass::kCoupled;
  forged.nu = vec({1});
  forged.mu = {vec({1})};
  forged.beta = 0.1;
  const auto grow = simulate_coupled(std::get<CoupledSystem>(probe.system), f, SwitchingSignal::constant(0),
                                     vec({1}), InitialHistory::constant(vec({1})), options(20.0, 0.01));
  const auto rep = check_decrease(probe, grow, forged, f);
  EXPECT_FALSE(rep.pass);
  EXPECT_GT(rep.violation_count, 0);
  EXPECT_LE(rep.violations.size(), 20u);
  EXPECT_GT(rep.worst, 0.0);
}

TEST(CheckDecrease, ClassMismatchThrows) {
  const SystemDescriptor desc{SystemClass::kSwitchedDelay, example1(), {}};
  auto cert = certify(desc);
  const auto f = Nonlinearity::identity(2);
  const auto traj = simulate_switched_delay(std::get<SwitchedDelaySystem>(desc.system), f,
                                            SwitchingSignal::constant(0), InitialHistory::constant(vec({1, 1})),
                                            options(1.0, 0.01));
  cert.cls = SystemClass::kNeutral;
  EXPECT_THROW(check_decrease(desc, traj, cert, f), CertificationError);
}

TEST(CheckDecrease, RandomCertifiedSystemsAllClasses) {
  std::mt19937_64 rng(11);
  ScenarioOptions sopt;
  sopt.horizon = 8.0;
  for (auto cls : {SystemClass::kSwitchedDelay, SystemClass::kCoupled, SystemClass::kSwitchedCoupled,
                   SystemClass::kNeutral, SystemClass::kDiscrete}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto [sys, cert] = random_certified(cls, rng);
      for (int i = 0; i < 3; ++i) {
        const auto sc = make_scenario(sys, 99, i, sopt);
        const auto traj = run_scenario(sys, sc, sopt);
        const auto rep = check_decrease(with_scenario_delays(sys, sc), traj, cert, sc.f);
        EXPECT_TRUE(rep.pass) << to_string(cls) << " trial " << trial << " scenario " << i << " worst "
                              << rep.worst;
      }
    }
  }
}

TEST(DiscreteDelta, ChainOfInequalities) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto [sys, cert] = random_certified(SystemClass::kDiscrete, rng);
    const auto sc = make_scenario(sys, 3, trial + 1, {});
    const auto traj = run_scenario(sys, sc, {});
    const auto& ds = std::get<DiscreteDelaySystem>(sys.system);
    for (long k = 0; k + 1 < static_cast<long>(traj.size()); k += 7) {
      const auto d = discrete_delta(ds, cert, traj, sc.f, k);
      EXPECT_NEAR(d.exact, d.delta_v, 1e-12 * std::max(1.0, std::abs(d.delta_v)));
      EXPECT_LE(d.delta_v, d.triangle + 1e-12);
      EXPECT_LE(d.triangle, d.bound + 1e-12);
      EXPECT_LE(d.bound, 1e-12);
    }
  }
}

TEST(Scenario, DeterministicAndGridAligned) {
  std::mt19937_64 rng(2);
  const auto [sys, cert] = random_certified(SystemClass::kSwitchedDelay, rng);
  ScenarioOptions opt;
  const auto a = make_scenario(sys, 7, 3, opt);
  const auto b = make_scenario(sys, 7, 3, opt);
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_EQ(a.delays, b.delays);
  EXPECT_EQ(a.sigma.breakpoints(), b.sigma.breakpoints());
  EXPECT_NE(make_scenario(sys, 7, 4, opt).seed, a.seed);
  const auto traj = run_scenario(sys, a, opt);
  EXPECT_TRUE(traj.warnings.empty());
  EXPECT_EQ(traj.seed, a.seed);

  const auto first = make_scenario(sys, 7, 0, opt);
  EXPECT_TRUE(first.f.is_identity());
  EXPECT_EQ(first.delays, std::get<SwitchedDelaySystem>(sys.system).delays);
}

TEST(Falsify, ProbeGrowsQuickly) {
  const SystemDescriptor probe{SystemClass::kCoupled, scalar_coupled(-1, 1, 1, 0.5, 0.5), {}};
  FalsifyOptions opt;
  opt.budget = 10;
  opt.seed = 1;
  const auto res = falsify(probe, opt);
  ASSERT_TRUE(res.best.has_value());
  EXPECT_GE(res.best->ratio, 10.0);
  ASSERT_TRUE(res.best_trajectory.has_value());
  EXPECT_EQ(res.best_trajectory->seed, res.best->seed);
}

TEST(Falsify, StableSystemReportsNothing) {
  SwitchedDelaySystem s;
  s.n = 2;
  s.a = {-Mat::Identity(2, 2)};
  s.b = {{Mat::Zero(2, 2)}};
  s.delays = {0.5};
  FalsifyOptions opt;
  opt.budget = 8;
  const auto res = falsify({SystemClass::kSwitchedDelay, s, {}}, opt);
  EXPECT_FALSE(res.best.has_value());
  for (const auto& o : res.outcomes) EXPECT_LE(o.ratio, 1.0);
}

TEST(Falsify, IndependentOfThreadCount) {
  std::mt19937_64 rng(4);
  const auto [sys, cert] = random_certified(SystemClass::kSwitchedCoupled, rng);
  FalsifyOptions opt;
  opt.budget = 9;
  opt.seed = 42;
  opt.scenario.horizon = 5.0;
  opt.threads = 1;
  const auto one = falsify(sys, opt);
  opt.threads = 4;
  const auto four = falsify(sys, opt);
  ASSERT_EQ(one.outcomes.size(), four.outcomes.size());
  for (std::size_t i = 0; i < one.outcomes.size(); ++i) {
    EXPECT_EQ(one.outcomes[i].seed, four.outcomes[i].seed);
    EXPECT_EQ(one.outcomes[i].ratio, four.outcomes[i].ratio);
  }
}

TEST(Functional, ContinuousAcrossSwitches) {
  const auto sys = example1();
  const auto cert = build_switched_delay(sys, vec({7, 4}));
  const auto f = Nonlinearity::identity(2);
  const SwitchingSignal sigma({0.0, 0.5, 1.5, 2.5}, {0, 1, 0, 1});
  const auto traj = simulate_switched_delay(sys, f, sigma, InitialHistory::constant(vec({1, 0.2})),
                                            options(4.0, 0.01));
  for (long k : {50L, 150L, 250L}) {
    auto dv = [&](long i) {
      return std::abs(eval_V_switched(cert, traj.track, i + 1, traj.delay_steps, f) -
                      eval_V_switched(cert, traj.track, i, traj.delay_steps, f));
    };
    EXPECT_LE(dv(k), 3.0 * std::max(dv(k - 1), dv(k + 1))) << "switch at step " << k;
  }
}

TEST(Functional, QuadratureIsSecondOrder) {
  const auto sys = example1();
  const auto cert = build_switched_delay(sys, vec({7, 4}));
  const auto f = Nonlinearity::uniform(2, parse_scalar_nonlinearity("tanh:1"));
  const auto phi = InitialHistory([](double th) { return vec({std::cos(3 * th), 0.5 + th}); });
  std::vector<double> vs;
  for (double h : {0.02, 0.01, 0.005}) {
    const auto traj = simulate_switched_delay(sys, f, SwitchingSignal::constant(0), phi, options(2.0, h));
    vs.push_back(eval_V_switched(cert, traj.track, static_cast<long>(traj.size()) - 1, traj.delay_steps, f));
  }
  const double order = std::log2(std::abs(vs[0] - vs[1]) / std::abs(vs[1] - vs[2]));
  EXPECT_GT(order, 1.8);
  EXPECT_LT(std::abs(vs[1] - vs[2]), 1e-3);
}
