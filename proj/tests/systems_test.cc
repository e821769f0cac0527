#include <gtest/gtest.h>

#include <cmath>

#include "krasovskii/nonlinearity.h"
#include "krasovskii/switching.h"
#include "krasovskii/systems.h"
#include "test_util.h"

using namespace krasovskii;
using krasovskii::testing::mat;
using krasovskii::testing::vec;

namespace {

SystemDescriptor example1() {
  SwitchedDelaySystem s;
  s.n = 2;
  const Mat a = mat({{-2, 0}, {0, -2}});
  s.a = {a, a};
  s.b = {{mat({{1, 1}, {1, 0}}), mat({{0, 1}, {3, 0}})}};
  s.delays = {1.0};
  return {SystemClass::kSwitchedDelay, s, {}};
}

}  // namespace

TEST(Validate, Example1IsClean) { EXPECT_TRUE(validate(example1()).empty()); }

TEST(Validate, NegativeBEntryNamed) {
  auto d = example1();
  std::get<SwitchedDelaySystem>(d.system).b[0][0](0, 1) = -0.1;
  const auto v = validate(d);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].matrix, "B[1][1]");
  EXPECT_EQ(v[0].row, 1);
  EXPECT_EQ(v[0].col, 2);
  EXPECT_NE(v[0].message().find("nonnegative"), std::string::npos);
}

TEST(Validate, NonMetzlerA) {
  auto d = example1();
  std::get<SwitchedDelaySystem>(d.system).a[1](1, 0) = -1.0;
  const auto v = validate(d);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].matrix, "A[2]");
  EXPECT_EQ(v[0].row, 2);
  EXPECT_EQ(v[0].col, 1);
}

TEST(Validate, NeutralDTildeNotSchur) {
  NeutralSystem s;
  s.n = 1;
  s.a = {mat({{-1}})};
  s.g = {mat({{0}})};
  s.d = mat({{1.2}});
  s.delay = 1.0;
  const auto v = validate({SystemClass::kNeutral, s, {}});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "D̃ not Schur-Cohn");

  s.d = mat({{-0.5}});
  EXPECT_TRUE(validate({SystemClass::kNeutral, s, {}}).empty());
}

TEST(Validate, ShapeAndClassErrors) {
  auto d = example1();
  std::get<SwitchedDelaySystem>(d.system).b[0][1] = Mat::Zero(3, 2);
  auto v = validate(d);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].rule.find("dimension"), std::string::npos);

  d = example1();
  d.cls = SystemClass::kDiscrete;
  v = validate(d);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].matrix, "class");

  CoupledSystem c;
  c.n = 1;
  c.m = 1;
  c.a = {mat({{-1}}), mat({{-2}})};
  c.b = c.c = c.d = {mat({{0}}), mat({{0}})};
  EXPECT_TRUE(validate({SystemClass::kSwitchedCoupled, c, {}}).empty());
  v = validate({SystemClass::kCoupled, c, {}});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "class coupled requires a single mode");
}

TEST(Validate, Idempotent) {
  auto d = example1();
  std::get<SwitchedDelaySystem>(d.system).b[0][0](0, 0) = -1;
  std::get<SwitchedDelaySystem>(d.system).delays = {-1.0};
  const auto v1 = validate(d);
  const auto v2 = validate(d);
  ASSERT_EQ(v1.size(), 2u);
  ASSERT_EQ(v1.size(), v2.size());
  for (std::size_t i = 0; i < v1.size(); ++i) EXPECT_EQ(v1[i].message(), v2[i].message());
}

TEST(Validate, DiscreteNeedsNonnegativeA) {
  DiscreteDelaySystem s;
  s.n = 1;
  s.a = {mat({{-0.1}})};
  s.b = {{mat({{0.2}})}};
  s.delays = {2};
  const auto v = validate({SystemClass::kDiscrete, s, {}});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].matrix, "A[1]");
}

TEST(Nonlinearity, Examples) {
  const Vec x = vec({3, -2});
  EXPECT_EQ(eval_nonlinearity(Nonlinearity::identity(2), x), x);
  const auto tanh1 = Nonlinearity::uniform(1, parse_scalar_nonlinearity("tanh:1"));
  EXPECT_EQ(eval_nonlinearity(tanh1, vec({0}))(0), 0.0);
  const auto sat = Nonlinearity::uniform(2, parse_scalar_nonlinearity("saturation:1"));
  EXPECT_EQ(eval_nonlinearity(sat, vec({5, -0.5})), vec({1, -0.5}));
}

TEST(Nonlinearity, PiecewiseLinear) {
  const auto f = parse_scalar_nonlinearity("pwl:0.5:2");
  EXPECT_DOUBLE_EQ(f(0.5), 0.25);
  EXPECT_DOUBLE_EQ(f(-3.0), -(0.5 + 4.0));
  EXPECT_EQ(parse_scalar_nonlinearity(f.name()).name(), f.name());
}

TEST(Nonlinearity, ParseErrors) {
  EXPECT_THROW(parse_scalar_nonlinearity("sinh"), Error);
  EXPECT_THROW(parse_scalar_nonlinearity("tanh:-1"), Error);
  EXPECT_THROW(parse_scalar_nonlinearity("pwl:1"), Error);
  EXPECT_THROW(parse_scalar_nonlinearity("saturation:x"), Error);
}

TEST(Nonlinearity, RegistryAdmissible) {
  for (const auto& e : nonlinearity_registry()) {
    EXPECT_TRUE(satisfies_sign_condition(e.prototype)) << e.name;
    EXPECT_EQ(parse_scalar_nonlinearity(e.prototype.name()).kind, e.prototype.kind);
  }
  EXPECT_TRUE(is_discrete_admissible(parse_scalar_nonlinearity("tanh:1")));
  EXPECT_FALSE(is_discrete_admissible(parse_scalar_nonlinearity("tanh:2")));
  EXPECT_TRUE(is_discrete_admissible(parse_scalar_nonlinearity("cubic")));
}

TEST(Nonlinearity, RandomDrawsAdmissible) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto f = random_nonlinearity(3, rng, i % 2 == 0);
    for (const auto& c : f.components()) EXPECT_TRUE(satisfies_sign_condition(c)) << c.name();
    if (i % 2 == 0) EXPECT_TRUE(f.discrete_admissible()) << f.name();
  }
}

TEST(Switching, PeriodicExample) {
  const auto s = sample_signal({SignalSpec::Kind::kPeriodic, 1.0}, 3.0, 2);
  EXPECT_EQ(s.breakpoints(), (std::vector<double>{0, 1, 2}));
  EXPECT_EQ(s.modes(), (std::vector<int>{0, 1, 0}));
  EXPECT_EQ(s.mode_at(0.0), 0);
  EXPECT_EQ(s.mode_at(0.999), 0);
  EXPECT_EQ(s.mode_at(1.0), 1);
  EXPECT_EQ(s.mode_at(3.0), 0);
}

TEST(Switching, RandomDeterministicAndDwell) {
  SignalSpec spec;
  spec.kind = SignalSpec::Kind::kRandom;
  spec.dwell_min = 0.3;
  spec.dwell_max = 0.9;
  spec.seed = 99;
  const auto a = sample_signal(spec, 50.0, 3);
  const auto b = sample_signal(spec, 50.0, 3);
  EXPECT_EQ(a.breakpoints(), b.breakpoints());
  EXPECT_EQ(a.modes(), b.modes());
  for (std::size_t i = 1; i < a.breakpoints().size(); ++i)
    EXPECT_GE(a.breakpoints()[i] - a.breakpoints()[i - 1], 0.3 - 1e-12);
  EXPECT_LE(a.max_mode(), 2);
  spec.seed = 100;
  EXPECT_NE(sample_signal(spec, 50.0, 3).breakpoints(), a.breakpoints());
}

TEST(Switching, SingleModeConstantAndErrors) {
  const auto s = sample_signal({SignalSpec::Kind::kRandom}, 10.0, 1);
  EXPECT_EQ(s.breakpoints().size(), 1u);
  EXPECT_EQ(s.mode_at(7.0), 0);
  EXPECT_THROW(sample_signal({SignalSpec::Kind::kPeriodic, 0.0}, 3.0, 2), Error);
  EXPECT_THROW(SwitchingSignal({0.0, 1.0, 1.0}, {0, 1, 0}), Error);
}
