#pragma once

#include "krasovskii/matrix_core.h"

namespace krasovskii::lp {

/// maximize cᵀz subject to A z <= b, z >= 0. Entries of b may have any sign.
struct LinearProgram {
  Mat a;
  Vec b;
  Vec c;
};

enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct Solution {
  Status status = Status::kInfeasible;
  Vec z;
  double objective = 0.0;
  int iterations = 0;
};

/// Two-phase primal simplex on a dense tableau. Entering and leaving
/// variables are chosen by Bland's lowest-index rule, so the method
/// terminates on degenerate problems.
Solution solve(const LinearProgram& lp, int max_iterations = 200000);

}  // namespace krasovskii::lp
