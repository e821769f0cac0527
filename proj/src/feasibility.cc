#include "krasovskii/feasibility.h"

#include <algorithm>
#include <limits>
#include <string>

#include "krasovskii/lp.h"

namespace krasovskii {

FeasibilityProblem::FeasibilityProblem(int dim, std::vector<Mat> ms)
    : n(dim), matrices(std::move(ms)) {
  validate();
}

FeasibilityProblem::FeasibilityProblem(std::vector<Mat> ms)
    : n(ms.empty() ? 0 : static_cast<int>(ms.front().rows())), matrices(std::move(ms)) {
  validate();
}

void FeasibilityProblem::validate() const {
  if (n <= 0) throw DimensionError("FeasibilityProblem: dimension must be positive");
  if (matrices.empty()) throw DimensionError("FeasibilityProblem: empty matrix list");
  for (std::size_t k = 0; k < matrices.size(); ++k) {
    if (matrices[k].rows() != n || matrices[k].cols() != n) {
      throw DimensionError("FeasibilityProblem: matrix " + std::to_string(k) +
                           " is not " + std::to_string(n) + "x" + std::to_string(n));
    }
  }
}

FeasibilityResult find_common_vector(const FeasibilityProblem& p) {
  p.validate();
  std::vector<const Mat*> unique;
  for (const Mat& m : p.matrices) {
    const bool seen =
        std::any_of(unique.begin(), unique.end(), [&](const Mat* u) { return *u == m; });
    if (!seen) unique.push_back(&m);
  }

  // Variables: ν' = ν - e (n entries, >= 0), t = t_plus - t_minus.
  const Eigen::Index n = p.n;
  const Eigen::Index rows = static_cast<Eigen::Index>(unique.size()) * n + n;
  lp::LinearProgram prog;
  prog.a = Mat::Zero(rows, n + 2);
  prog.b = Vec::Zero(rows);
  prog.c = Vec::Zero(n + 2);
  prog.c(n) = 1.0;
  prog.c(n + 1) = -1.0;
  const Vec ones = Vec::Ones(n);
  Eigen::Index r = 0;
  for (const Mat* m : unique) {
    const Mat mt = m->transpose();
    const Vec base = mt * ones;
    for (Eigen::Index j = 0; j < n; ++j, ++r) {
      prog.a.block(r, 0, 1, n) = mt.row(j);
      prog.a(r, n) = 1.0;
      prog.a(r, n + 1) = -1.0;
      prog.b(r) = -base(j);
    }
  }
  for (Eigen::Index j = 0; j < n; ++j, ++r) {
    prog.a(r, j) = 1.0;
    prog.b(r) = kNuCap - 1.0;
  }

  const lp::Solution sol = lp::solve(prog);
  if (sol.status != lp::Status::kOptimal) {
    throw Error("find_common_vector: LP did not reach an optimum (internal error)");
  }

  FeasibilityResult res;
  res.iterations = sol.iterations;
  res.lp_optimum = sol.z(n) - sol.z(n + 1);
  if (res.lp_optimum > kStrictSlack) {
    Vec nu = ones + sol.z.head(n);
    nu /= nu.minCoeff();
    res.verdict = Verdict::kSat;
    res.slack = -check_vector(p, nu);
    res.witness = std::move(nu);
  } else {
    res.verdict = Verdict::kUnsat;
    res.slack = res.lp_optimum;
  }
  return res;
}

double check_vector(const FeasibilityProblem& p, const Vec& nu) {
  p.validate();
  if (nu.size() != p.n) throw DimensionError("check_vector: dimension mismatch");
  if (!(nu.array() > 0.0).all()) throw Error("check_vector: ν must be strictly positive");
  double worst = -std::numeric_limits<double>::infinity();
  for (const Mat& m : p.matrices) worst = std::max(worst, (m.transpose() * nu).maxCoeff());
  return worst;
}

bool brute_force_feasible(const FeasibilityProblem& p, int grid_points) {
  p.validate();
  if (p.n > 3) throw DimensionError("brute_force_feasible: dimension above 3");
  if (grid_points < p.n) throw Error("brute_force_feasible: grid too coarse");
  const double g = grid_points;
  Vec nu(p.n);
  switch (p.n) {
    case 1:
      nu << 1.0;
      return check_vector(p, nu) < 0.0;
    case 2:
      for (int i = 1; i < grid_points; ++i) {
        nu << i / g, (grid_points - i) / g;
        if (check_vector(p, nu) < 0.0) return true;
      }
      return false;
    default:
      for (int i = 1; i < grid_points; ++i) {
        for (int j = 1; i + j < grid_points; ++j) {
          nu << i / g, j / g, (grid_points - i - j) / g;
          if (check_vector(p, nu) < 0.0) return true;
        }
      }
      return false;
  }
}

}  // namespace krasovskii
