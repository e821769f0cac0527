#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "krasovskii/matrix_core.h"

namespace krasovskii {

enum class NonlinearityKind {
  kIdentity,         // f(x) = x
  kTanhScaled,       // f(x) = γ tanh(x)
  kCubicSign,        // f(x) = x³ / (1 + x²)
  kSaturation,       // f(x) = clamp(x, -limit, limit)
  kPiecewiseLinear,  // slope s1 on |x| <= 1, slope s2 beyond
};

/// One diagonal component f_i of an admissible nonlinearity.
struct ScalarNonlinearity {
  NonlinearityKind kind = NonlinearityKind::kIdentity;
  double p1 = 1.0;  // γ, limit or s1
  double p2 = 0.0;  // s2

  double operator()(double x) const;
  /// Parseable name, e.g. "tanh:2", "pwl:0.5:1.5".
  std::string name() const;
  /// Whether |f(x)| grows without bound; bounded components do not give a
  /// radially unbounded comparison and global boundedness is not expected.
  bool radially_unbounded() const;
};

/// Sampled check of x f(x) > 0 on ±logspace(1e-6, 1e3), 10⁴ points total.
bool satisfies_sign_condition(const ScalarNonlinearity& f);
/// Sign condition plus |f(x)| <= |x| on the same grid.
bool is_discrete_admissible(const ScalarNonlinearity& f);

/// Diagonal map x ↦ (f_1(x_1), ..., f_n(x_n)).
class Nonlinearity {
 public:
  Nonlinearity() = default;
  explicit Nonlinearity(std::vector<ScalarNonlinearity> components);
  static Nonlinearity identity(int n);
  static Nonlinearity uniform(int n, ScalarNonlinearity component);

  Vec apply(const Vec& x) const;
  int dim() const { return static_cast<int>(components_.size()); }
  const std::vector<ScalarNonlinearity>& components() const { return components_; }
  bool is_identity() const;
  bool discrete_admissible() const;
  std::string name() const;

 private:
  std::vector<ScalarNonlinearity> components_;
};

/// Componentwise application (n must match).
Vec eval_nonlinearity(const Nonlinearity& f, const Vec& x);

/// Parses "identity", "tanh:γ", "cubic", "saturation:L", "pwl:s1:s2".
/// Throws Error on unknown names or inadmissible parameters.
ScalarNonlinearity parse_scalar_nonlinearity(const std::string& spec);

struct RegistryEntry {
  std::string name;
  std::string description;
  ScalarNonlinearity prototype;
};

/// Representative admissible nonlinearities shipped with the library.
const std::vector<RegistryEntry>& nonlinearity_registry();

/// Random per-coordinate draw from the registry kinds with randomized
/// parameters. With discrete_only every component satisfies |f(x)| <= |x|.
Nonlinearity random_nonlinearity(int n, std::mt19937_64& rng, bool discrete_only);

}  // namespace krasovskii
