#include "krasovskii/feasibility.h"

#include <random>

#include <gtest/gtest.h>

#include "krasovskii/lp.h"
#include "test_util.h"

namespace krasovskii {
namespace {

using testing::mat;
using testing::vec;

FeasibilityProblem example1_pairs() {
  const Mat a = mat({{-2, 0}, {0, -2}});
  return FeasibilityProblem({a + mat({{1, 1}, {1, 0}}), a + mat({{0, 1}, {3, 0}})});
}

FeasibilityProblem example2_pairs() {
  // A ∈ {-0.2, -0.9}, B ∈ {0.1, 0.8}: every A + B combination.
  return FeasibilityProblem(
      {mat({{-0.2 + 0.1}}), mat({{-0.2 + 0.8}}), mat({{-0.9 + 0.1}}), mat({{-0.9 + 0.8}})});
}

TEST(LinearProgramTest, SmallProblems) {
  // max x + y s.t. x + 2y <= 4, 3x + y <= 6 → (1.6, 1.2), objective 2.8.
  lp::LinearProgram p{mat({{1, 2}, {3, 1}}), vec({4, 6}), vec({1, 1})};
  auto sol = lp::solve(p);
  ASSERT_EQ(sol.status, lp::Status::kOptimal);
  EXPECT_NEAR(sol.objective, 2.8, 1e-12);
  EXPECT_NEAR(sol.z(0), 1.6, 1e-12);

  // Needs phase one: x >= 2 written as -x <= -2, max -x → x = 2.
  lp::LinearProgram q{mat({{-1}, {1}}), vec({-2, 5}), vec({-1})};
  sol = lp::solve(q);
  ASSERT_EQ(sol.status, lp::Status::kOptimal);
  EXPECT_NEAR(sol.z(0), 2.0, 1e-12);

  lp::LinearProgram infeasible{mat({{1}, {-1}}), vec({1, -2}), vec({1})};
  EXPECT_EQ(lp::solve(infeasible).status, lp::Status::kInfeasible);

  lp::LinearProgram unbounded{mat({{-1}}), vec({1}), vec({1})};
  EXPECT_EQ(lp::solve(unbounded).status, lp::Status::kUnbounded);
}

TEST(LinearProgramTest, DegenerateProblemTerminates) {
  // Classic cycling example (Beale) under the largest-coefficient rule.
  lp::LinearProgram p{mat({{0.25, -60, -1.0 / 25, 9}, {0.5, -90, -1.0 / 50, 3}, {0, 0, 1, 0}}),
                      vec({0, 0, 1}), vec({0.75, -150, 1.0 / 50, -6})};
  const auto sol = lp::solve(p);
  ASSERT_EQ(sol.status, lp::Status::kOptimal);
  EXPECT_NEAR(sol.objective, 0.05, 1e-12);
}

TEST(FindCommonVectorTest, Example1PairsAreFeasible) {
  const auto p = example1_pairs();
  const auto res = find_common_vector(p);
  ASSERT_TRUE(res.sat());
  EXPECT_GE(res.witness->minCoeff(), 1.0);
  EXPECT_LE(check_vector(p, *res.witness), -res.slack + 1e-12);
  EXPECT_GT(res.slack, kStrictSlack);
  // (A+B₁)ᵀν = (-3, -1)ᵀ and (A+B₂)ᵀν = (-2, -1)ᵀ.
  EXPECT_DOUBLE_EQ(check_vector(p, vec({7, 4})), -1.0);
}

TEST(FindCommonVectorTest, Example1MaxMatrixIsInfeasible) {
  const auto res = find_common_vector(FeasibilityProblem({mat({{-1, 1}, {3, -2}})}));
  EXPECT_EQ(res.verdict, Verdict::kUnsat);
  EXPECT_FALSE(res.witness.has_value());
  EXPECT_LE(res.slack, kStrictSlack);
}

TEST(FindCommonVectorTest, NegativeIdentity) {
  const FeasibilityProblem p({-Mat::Identity(3, 3)});
  const auto res = find_common_vector(p);
  ASSERT_TRUE(res.sat());
  EXPECT_TRUE(res.witness->isApprox(Vec::Ones(3)));
  EXPECT_NEAR(res.slack, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(check_vector(p, Vec::Ones(3)), -1.0);
}

TEST(FindCommonVectorTest, Example2PairsAreInfeasible) {
  const auto p = example2_pairs();
  EXPECT_EQ(find_common_vector(p).verdict, Verdict::kUnsat);
  EXPECT_NEAR(check_vector(p, vec({1})), 0.6, 1e-15);
  EXPECT_FALSE(brute_force_feasible(p, 200));
}

TEST(FindCommonVectorTest, Errors) {
  EXPECT_THROW(FeasibilityProblem(std::vector<Mat>{}), DimensionError);
  EXPECT_THROW(FeasibilityProblem({Mat::Zero(2, 2), Mat::Zero(3, 3)}), DimensionError);
  EXPECT_THROW(check_vector(example1_pairs(), vec({1, 0})), Error);
  EXPECT_THROW(check_vector(example1_pairs(), vec({1})), DimensionError);
  EXPECT_THROW(brute_force_feasible(FeasibilityProblem({-Mat::Identity(4, 4)}), 10),
               DimensionError);
}

TEST(BruteForceTest, Examples) {
  EXPECT_TRUE(brute_force_feasible(example1_pairs(), 200));
  EXPECT_TRUE(brute_force_feasible(FeasibilityProblem({-Mat::Identity(3, 3)}), 7));
  EXPECT_TRUE(brute_force_feasible(FeasibilityProblem({-Mat::Identity(1, 1)}), 1));
}

// Metzler matrix plus a nonnegative one, the shape every theorem condition
// produces.
std::vector<Mat> random_composites(std::mt19937_64& rng, int n, int count) {
  std::vector<Mat> ms;
  for (int k = 0; k < count; ++k) {
    ms.push_back(testing::random_metzler(rng, n, 1.0, -3.0, -0.2) +
                 testing::random_nonnegative(rng, n, n, 0.6));
  }
  return ms;
}

TEST(FindCommonVectorTest, AgreesWithBruteForce) {
  std::mt19937_64 rng(2024);
  int compared = 0, sat = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + trial % 3;
    const FeasibilityProblem p(random_composites(rng, n, 1 + trial % 4));
    const auto res = find_common_vector(p);
    if (std::abs(res.lp_optimum) < 1e-6) continue;
    EXPECT_EQ(res.sat(), brute_force_feasible(p, 200)) << "trial " << trial;
    ++compared;
    sat += res.sat();
  }
  EXPECT_GT(compared, 250);
  EXPECT_GT(sat, 30);
  EXPECT_LT(sat, compared - 30);
}

TEST(FindCommonVectorTest, Properties) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 4;
    auto ms = random_composites(rng, n, 1 + trial % 3);
    const FeasibilityProblem p(ms);
    const auto res = find_common_vector(p);
    if (res.sat()) EXPECT_LE(check_vector(p, *res.witness), -kStrictSlack);

    // Scaling every matrix by the same positive factor keeps the verdict.
    std::vector<Mat> scaled;
    for (const Mat& m : ms) scaled.push_back(3.7 * m);
    EXPECT_EQ(find_common_vector(FeasibilityProblem(scaled)).verdict, res.verdict);

    // Adding a constraint never turns UNSAT into SAT.
    ms.push_back(testing::random_metzler(rng, n, 1.0, -3.0, -0.2));
    const auto more = find_common_vector(FeasibilityProblem(ms));
    if (!res.sat()) EXPECT_FALSE(more.sat());
  }
}

}  // namespace
}  // namespace krasovskii
