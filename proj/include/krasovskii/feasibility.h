#pragma once

#include <optional>
#include <vector>

#include "krasovskii/matrix_core.h"

namespace krasovskii {

/// Upper box bound on witness entries; the lower bound is 1.
inline constexpr double kNuCap = 1e6;
/// Optimal LP slack must exceed this for a SAT verdict.
inline constexpr double kStrictSlack = 1e-9;

/// Family of square matrices M_k for the conditions M_kᵀν ≪ 0.
struct FeasibilityProblem {
  int n = 0;
  std::vector<Mat> matrices;

  FeasibilityProblem() = default;
  FeasibilityProblem(int dim, std::vector<Mat> ms);
  explicit FeasibilityProblem(std::vector<Mat> ms);

  /// Throws DimensionError unless the list is nonempty and every matrix is
  /// n x n.
  void validate() const;
};

enum class Verdict { kSat, kUnsat };

struct FeasibilityResult {
  Verdict verdict = Verdict::kUnsat;
  /// Present iff SAT. Rescaled so that its smallest entry is exactly 1.
  std::optional<Vec> witness;
  /// Uniform margin: every (M_kᵀν)_j <= -slack. For SAT this refers to the
  /// rescaled witness; for UNSAT it is the LP optimum (<= kStrictSlack).
  double slack = 0.0;
  /// Raw optimum of the box-constrained LP.
  double lp_optimum = 0.0;
  int iterations = 0;

  bool sat() const { return verdict == Verdict::kSat; }
};

/// Decides existence of ν ≫ 0 with M_kᵀν ≪ 0 for all k by solving
///   maximize t  s.t. (M_kᵀν)_j <= -t,  1 <= ν_j <= kNuCap.
/// Duplicate matrices are dropped before the LP is assembled.
FeasibilityResult find_common_vector(const FeasibilityProblem& p);

/// max over k, j of (M_kᵀν)_j. Negative means ν certifies the family.
double check_vector(const FeasibilityProblem& p, const Vec& nu);

/// Grid search over the open simplex {ν ≫ 0, Σν = 1} with `grid_points`
/// subdivisions per edge. Only dimensions 1-3 are accepted.
bool brute_force_feasible(const FeasibilityProblem& p, int grid_points);

}  // namespace krasovskii
