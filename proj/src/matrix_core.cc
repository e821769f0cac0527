#include "krasovskii/matrix_core.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace krasovskii {
namespace {

void require_square(const Mat& m, std::string_view what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError(std::string(what) + ": expected a nonempty square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

double eval_poly(std::span<const double> c, double x) {
  double acc = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
  return acc;
}

std::vector<double> derivative(std::span<const double> c) {
  std::vector<double> d;
  for (std::size_t i = 1; i < c.size(); ++i) d.push_back(static_cast<double>(i) * c[i]);
  return d;
}

double bisect(std::span<const double> c, double lo, double hi) {
  double flo = eval_poly(c, lo);
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = eval_poly(c, mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// All real roots (ascending) of a polynomial with ascending coefficients and
// nonzero leading coefficient. Each monotone piece between critical points
// holds at most one root; double roots are caught at the critical points.
std::vector<double> real_roots(std::span<const double> c) {
  const std::size_t deg = c.size() - 1;
  if (deg == 0) return {};
  if (deg == 1) return {-c[0] / c[1]};
  double bound = 0.0;
  for (std::size_t i = 0; i < deg; ++i) bound = std::max(bound, std::abs(c[i] / c[deg]));
  bound += 1.0;
  double scale = 0.0;
  for (double v : c) scale += std::abs(v);

  std::vector<double> pts{-bound};
  const auto dc = derivative(c);
  for (double r : real_roots(dc)) pts.push_back(std::clamp(r, -bound, bound));
  pts.push_back(bound);

  std::vector<double> roots;
  auto near_zero = [&](double x) {
    const double mag = std::pow(std::max(1.0, std::abs(x)), static_cast<double>(deg));
    return std::abs(eval_poly(c, x)) <= 1e-12 * scale * mag;
  };
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i];
    const double b = pts[i + 1];
    const double fa = eval_poly(c, a);
    const double fb = eval_poly(c, b);
    if (i > 0 && near_zero(a)) {
      if (roots.empty() || roots.back() != a) roots.push_back(a);
      continue;
    }
    if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) roots.push_back(bisect(c, a, b));
  }
  return roots;
}

}  // namespace

void require_finite(const Mat& m, std::string_view what) {
  if (!m.allFinite()) throw Error(std::string(what) + ": non-finite entry");
}

bool is_metzler(const Mat& a, double tol) {
  require_square(a, "is_metzler");
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (i != j && a(i, j) < -tol) return false;
  return true;
}

bool is_nonnegative(const Mat& m, double tol) { return (m.array() >= -tol).all(); }

bool metzler_hurwitz(const Mat& a) {
  if (!is_metzler(a, kStructureTol)) {
    throw StructureError("metzler_hurwitz: input is not Metzler");
  }
  Mat z = -a;
  const Eigen::Index n = z.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    // Pivot k equals the ratio of consecutive leading principal minors.
    if (!(z(k, k) > 0.0)) return false;
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double factor = z(i, k) / z(k, k);
      z.block(i, k, 1, n - k) -= factor * z.block(k, k, 1, n - k);
    }
  }
  return true;
}

std::vector<double> characteristic_polynomial(const Mat& m) {
  require_square(m, "characteristic_polynomial");
  const Eigen::Index n = m.rows();
  std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
  c[static_cast<std::size_t>(n)] = 1.0;
  Mat mk = Mat::Zero(n, n);
  const Mat id = Mat::Identity(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    mk = m * mk + c[static_cast<std::size_t>(n - k + 1)] * id;
    c[static_cast<std::size_t>(n - k)] = -(m * mk).trace() / static_cast<double>(k);
  }
  return c;
}

double largest_real_root(std::span<const double> coeffs) {
  if (coeffs.size() < 2 || coeffs.size() > 5) {
    throw DimensionError("largest_real_root: degree must be between 1 and 4");
  }
  const auto roots = real_roots(coeffs);
  if (roots.empty()) return std::numeric_limits<double>::quiet_NaN();
  return *std::max_element(roots.begin(), roots.end());
}

double perron_root(const Mat& m) {
  require_square(m, "perron_root");
  if (!is_nonnegative(m)) throw StructureError("perron_root: negative entry");
  const Eigen::Index n = m.rows();
  if (n == 1) return m(0, 0);

  const Mat shifted = m + Mat::Identity(n, n);
  Vec x = Vec::Constant(n, 1.0 / static_cast<double>(n));
  double estimate = 0.0;
  constexpr int kMaxIterations = 20000;
  for (int it = 0; it < kMaxIterations; ++it) {
    const Vec y = shifted * x;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ratio = y(i) / x(i);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    if (hi - lo <= 1e-11 * hi) return std::max(0.0, 0.5 * (lo + hi) - 1.0);
    estimate = y.sum();
    x = y / estimate;
    // Components that underflow signal a reducible matrix; the bounds
    // will not close, so stop iterating.
    if (x.minCoeff() < 1e-280) break;
  }
  if (n <= 4) {
    const auto c = characteristic_polynomial(m);
    const double r = largest_real_root(c);
    if (std::isfinite(r)) return std::max(0.0, r);
  }
  return std::max(0.0, estimate - 1.0);
}

bool schur_cohn_nonneg(const Mat& d, double tol_schur) {
  if (!is_nonnegative(d)) throw StructureError("schur_cohn_nonneg: negative entry");
  return perron_root(d) < 1.0 - tol_schur;
}

Mat m_matrix_inverse(const Mat& d) {
  require_square(d, "m_matrix_inverse");
  if (!schur_cohn_nonneg(d)) {
    throw StructureError("m_matrix_inverse: spectral radius of D is not below one");
  }
  const Eigen::Index n = d.rows();
  const Mat i_minus_d = Mat::Identity(n, n) - d;
  Mat inv = i_minus_d.partialPivLu().inverse();
  inv = inv.cwiseMax(0.0);
  return inv;
}

Mat metzler_majorant(const Mat& a) {
  require_square(a, "metzler_majorant");
  Mat out = a.cwiseAbs();
  out.diagonal() = a.diagonal();
  return out;
}

TildeMatrices tilde_transform(const Mat& a, const Mat& b, const Mat& d) {
  require_square(a, "tilde_transform");
  if (b.rows() != a.rows() || b.cols() != a.cols() || d.rows() != a.rows() ||
      d.cols() != a.cols()) {
    throw DimensionError("tilde_transform: A, B and D must share one square shape");
  }
  return {metzler_majorant(a), b.cwiseAbs(), d.cwiseAbs()};
}

Vec elementwise_max(std::span<const Vec> vs) {
  if (vs.empty()) throw DimensionError("elementwise_max: empty list");
  Vec out = vs.front();
  for (const Vec& v : vs.subspan(1)) {
    if (v.size() != out.size()) throw DimensionError("elementwise_max: size mismatch");
    out = out.cwiseMax(v);
  }
  return out;
}

}  // namespace krasovskii
