#pragma once

#include <span>
#include <vector>
#include <string_view>

#include <Eigen/Dense>

#include "krasovskii/errors.h"

namespace krasovskii {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Tolerance for sign and structure checks.
inline constexpr double kStructureTol = 1e-12;
/// Strict margin below one required of a spectral radius.
inline constexpr double kSchurTol = 1e-9;

/// Throws Error if any entry is NaN or infinite.
void require_finite(const Mat& m, std::string_view what);

/// True iff every off-diagonal entry is >= -tol.
bool is_metzler(const Mat& a, double tol = 0.0);

/// True iff every entry is >= -tol.
bool is_nonnegative(const Mat& m, double tol = 0.0);

/// Hurwitz test for a Metzler matrix.
///
/// -A is a Z-matrix, so A is Hurwitz exactly when -A is a nonsingular
/// M-matrix, i.e. when every leading principal minor of -A is positive.
/// The minors are obtained as products of the pivots of Gaussian
/// elimination without pivoting, which is stable on M-matrices.
/// Throws StructureError when `a` is not Metzler (within kStructureTol).
bool metzler_hurwitz(const Mat& a);

/// Spectral radius of a nonnegative matrix.
///
/// Power iteration on M + I from the all-ones vector, stopped when the
/// Collatz-Wielandt bounds agree to 1e-10 relative. When those bounds do
/// not close (reducible or defective M) matrices of dimension <= 4 fall
/// back to bracketing the largest real root of the characteristic
/// polynomial.
double perron_root(const Mat& m);

/// perron_root(d) < 1 - tol_schur. Throws StructureError on negative entries.
bool schur_cohn_nonneg(const Mat& d, double tol_schur = kSchurTol);

/// (I - D)^{-1} for nonnegative Schur-Cohn D, by LU with partial pivoting.
/// The result is entrywise nonnegative; round-off negatives are clamped.
Mat m_matrix_inverse(const Mat& d);

/// Metzler comparison matrix: diagonal kept, off-diagonals replaced by
/// their absolute values.
Mat metzler_majorant(const Mat& a);

struct TildeMatrices {
  Mat a;
  Mat b;
  Mat d;
};

/// (Ã, B̃, D̃): Ã = metzler_majorant(A), B̃ = |B|, D̃ = |D| entrywise.
TildeMatrices tilde_transform(const Mat& a, const Mat& b, const Mat& d);

/// Elementwise maximum of a nonempty list of equally sized vectors.
Vec elementwise_max(std::span<const Vec> vs);

/// Coefficients c[0..n] of det(xI - M) = x^n + c[n-1] x^{n-1} + ... + c[0]
/// (Faddeev-LeVerrier). c[n] == 1.
std::vector<double> characteristic_polynomial(const Mat& m);

/// Largest real root of a monic polynomial of degree <= 4 given by
/// ascending coefficients, or NaN when it has no real root.
double largest_real_root(std::span<const double> coeffs);

}  // namespace krasovskii
