#include "krasovskii/lp.h"

#include <cmath>
#include <limits>
#include <vector>

namespace krasovskii::lp {
namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-11;

// Tableau with one row per constraint and a trailing right-hand-side column.
// The objective row is kept separately as reduced costs for maximization.
class Tableau {
 public:
  Tableau(Mat t, std::vector<int> basis) : t_(std::move(t)), basis_(std::move(basis)) {}

  Eigen::Index rows() const { return t_.rows(); }
  Eigen::Index rhs_col() const { return t_.cols() - 1; }

  // Runs simplex iterations maximizing `cost` restricted to columns with
  // allowed[j] true. Returns kOptimal, kUnbounded or kIterationLimit.
  Status optimize(const Vec& cost, const std::vector<bool>& allowed, int& iterations,
                  int max_iterations) {
    while (true) {
      if (iterations >= max_iterations) return Status::kIterationLimit;
      const Vec reduced = reduced_costs(cost);
      Eigen::Index entering = -1;
      for (Eigen::Index j = 0; j < rhs_col(); ++j) {
        if (allowed[static_cast<std::size_t>(j)] && reduced(j) > kCostTol) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return Status::kOptimal;

      double best_ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < rows(); ++i) {
        const double coef = t_(i, entering);
        if (coef > kPivotTol) best_ratio = std::min(best_ratio, t_(i, rhs_col()) / coef);
      }
      Eigen::Index leaving = -1;
      if (std::isfinite(best_ratio)) {
        const double tie = 1e-12 * std::max(1.0, std::abs(best_ratio));
        for (Eigen::Index i = 0; i < rows(); ++i) {
          const double coef = t_(i, entering);
          if (coef <= kPivotTol || t_(i, rhs_col()) / coef > best_ratio + tie) continue;
          if (leaving < 0 || basis_[static_cast<std::size_t>(i)] <
                                 basis_[static_cast<std::size_t>(leaving)]) {
            leaving = i;
          }
        }
      }
      if (leaving < 0) return Status::kUnbounded;
      pivot(leaving, entering);
      ++iterations;
    }
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    t_.row(row) /= t_(row, col);
    for (Eigen::Index i = 0; i < rows(); ++i) {
      if (i == row) continue;
      const double factor = t_(i, col);
      if (factor != 0.0) t_.row(i) -= factor * t_.row(row);
    }
    basis_[static_cast<std::size_t>(row)] = static_cast<int>(col);
  }

  Vec reduced_costs(const Vec& cost) const {
    Vec cb(rows());
    for (Eigen::Index i = 0; i < rows(); ++i) cb(i) = cost(basis_[static_cast<std::size_t>(i)]);
    Vec reduced = cost - (cb.transpose() * t_.leftCols(rhs_col())).transpose();
    return reduced;
  }

  double value(const Vec& cost) const {
    double v = 0.0;
    for (Eigen::Index i = 0; i < rows(); ++i)
      v += cost(basis_[static_cast<std::size_t>(i)]) * t_(i, rhs_col());
    return v;
  }

  Mat& data() { return t_; }
  const Mat& data() const { return t_; }
  std::vector<int>& basis() { return basis_; }

 private:
  Mat t_;
  std::vector<int> basis_;
};

}  // namespace

Solution solve(const LinearProgram& lp, int max_iterations) {
  const Eigen::Index m = lp.a.rows();
  const Eigen::Index n = lp.a.cols();
  if (lp.b.size() != m || lp.c.size() != n) {
    throw DimensionError("lp::solve: inconsistent problem dimensions");
  }

  // Columns: n structural, m slacks, one artificial per row with b < 0, rhs.
  std::vector<Eigen::Index> negative_rows;
  for (Eigen::Index i = 0; i < m; ++i)
    if (lp.b(i) < 0.0) negative_rows.push_back(i);
  const Eigen::Index n_art = static_cast<Eigen::Index>(negative_rows.size());
  const Eigen::Index n_cols = n + m + n_art;

  Mat t = Mat::Zero(m, n_cols + 1);
  std::vector<int> basis(static_cast<std::size_t>(m));
  Eigen::Index art = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sign = lp.b(i) < 0.0 ? -1.0 : 1.0;
    t.block(i, 0, 1, n) = sign * lp.a.row(i);
    t(i, n + i) = sign;
    t(i, n_cols) = sign * lp.b(i);
    if (sign < 0.0) {
      t(i, n + m + art) = 1.0;
      basis[static_cast<std::size_t>(i)] = static_cast<int>(n + m + art);
      ++art;
    } else {
      basis[static_cast<std::size_t>(i)] = static_cast<int>(n + i);
    }
  }

  Tableau tab(std::move(t), std::move(basis));
  Solution sol;
  std::vector<bool> allowed(static_cast<std::size_t>(n_cols), true);

  if (n_art > 0) {
    Vec phase1 = Vec::Zero(n_cols);
    phase1.tail(n_art).setConstant(-1.0);
    const Status s = tab.optimize(phase1, allowed, sol.iterations, max_iterations);
    if (s == Status::kIterationLimit) {
      sol.status = s;
      return sol;
    }
    double scale = 1.0;
    for (Eigen::Index i = 0; i < m; ++i) scale = std::max(scale, std::abs(lp.b(i)));
    if (tab.value(phase1) < -1e-9 * scale) {
      sol.status = Status::kInfeasible;
      return sol;
    }
    // Pivot artificials that remain basic at level zero out of the basis.
    for (Eigen::Index i = 0; i < m; ++i) {
      if (tab.basis()[static_cast<std::size_t>(i)] < n + m) continue;
      for (Eigen::Index j = 0; j < n + m; ++j) {
        if (std::abs(tab.data()(i, j)) > kPivotTol) {
          tab.pivot(i, j);
          break;
        }
      }
    }
    for (Eigen::Index j = n + m; j < n_cols; ++j) allowed[static_cast<std::size_t>(j)] = false;
  }

  Vec cost = Vec::Zero(n_cols);
  cost.head(n) = lp.c;
  const Status s = tab.optimize(cost, allowed, sol.iterations, max_iterations);
  sol.status = s;
  if (s != Status::kOptimal) return sol;

  sol.z = Vec::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const int col = tab.basis()[static_cast<std::size_t>(i)];
    if (col < n) sol.z(col) = tab.data()(i, tab.rhs_col());
  }
  sol.objective = lp.c.dot(sol.z);
  return sol;
}

}  // namespace krasovskii::lp
