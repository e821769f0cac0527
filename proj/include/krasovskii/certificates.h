#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "krasovskii/feasibility.h"
#include "krasovskii/systems.h"

namespace krasovskii {

/// Largest number of composite matrices a tuple condition may enumerate.
inline constexpr std::size_t kTupleCap = 100000;
/// verify_certificate passes iff every margin is <= -kVerifyMargin.
inline constexpr double kVerifyMargin = 1e-10;
/// Cap on the number of ε halvings.
inline constexpr int kMaxHalvings = 60;

enum class FailureReason {
  kInvalidSystem,
  kInfeasible,
  kTupleCapExceeded,
  kDNotSchur,
  kNoCommonV,
  kCompositeNotHurwitz,
  kEpsilonExhausted,
  /// The pair condition holds, yet no (ν, μ) satisfies both inequality
  /// families of the functional. Possible once B or D vary with the mode.
  kNoFunctional,
  kConstructionFailed,
  kClassMismatch,
};

std::string_view to_string(FailureReason r);

class CertificationError : public Error {
 public:
  CertificationError(FailureReason reason, const std::string& detail);
  FailureReason reason() const { return reason_; }

 private:
  FailureReason reason_;
};

/// How the functional coefficients were obtained.
struct Derivation {
  /// Uniform vector of the LP slack: q for continuous delay systems, w for
  /// discrete ones.
  Vec q;
  /// Per-channel elementwise maxima B_rᵀν (continuous w_r, discrete d_l).
  /// For coupled and neutral systems the single entry is the ε-free part of μ.
  std::vector<Vec> w;
  /// Witness of (D - I)ᵀv ≪ 0 (coupled and neutral systems).
  Vec v;
  double epsilon = 0.0;
  int halvings = 0;
  double lp_slack = 0.0;
  /// "proof" when the textbook choice of μ verified; "least_b_side" when
  /// the smallest μ satisfying every B-side inequality had to be used;
  /// "joint_lp" when even that failed the A-side and ν, μ were re-solved
  /// together.
  std::string construction = "proof";
};

/// Coefficients of a linear Lyapunov-Krasovskii functional.
struct Certificate {
  SystemClass cls = SystemClass::kSwitchedDelay;
  Vec nu;
  /// One vector per delay channel (coupled and neutral: exactly one).
  std::vector<Vec> mu;
  /// Realized decrease margin: the functional's Dini derivative is bounded
  /// by -β times the sum of |f_j| (|y_j| for neutral systems).
  double beta = 0.0;
  Derivation derivation;
};

struct MarginEntry {
  std::string family;
  double worst = 0.0;
  bool pass = false;
};

struct MarginReport {
  std::vector<MarginEntry> entries;
  bool pass = false;
};

/// The strict linear inequality family whose solvability each class's
/// theorem requires, as a feasibility problem in ν. Coupled and neutral
/// classes first establish the D-condition and throw CertificationError
/// (kDNotSchur / kNoCommonV) when it fails; tuple conditions throw
/// kTupleCapExceeded beyond kTupleCap composites.
FeasibilityProblem theorem_condition(const SystemDescriptor& sys);

/// Single delay channel: pairs A^(s) + B^(r); μ = w + q/2.
Certificate build_switched_delay(const SwitchedDelaySystem& sys,
                                 const std::optional<Vec>& nu = std::nullopt);
/// Several channels: tuples A^(s) + B_1^(p1) + ... + B_l^(pl); μ_r = w_r + q/(2l).
Certificate build_multi_delay(const SwitchedDelaySystem& sys,
                              const std::optional<Vec>& nu = std::nullopt);
/// Single-mode coupled system: μ = (I - Dᵀ)⁻¹Bᵀν + εv.
Certificate build_coupled(const CoupledSystem& sys, const std::optional<Vec>& nu = std::nullopt);
/// Switched coupled system with a common v, Dᵀv ≪ v, for every mode.
Certificate build_switched_coupled(const CoupledSystem& sys,
                                   const std::optional<Vec>& nu = std::nullopt);
/// Neutral system via the tilde comparison matrices.
Certificate build_neutral(const NeutralSystem& sys, const std::optional<Vec>& nu = std::nullopt);
/// Discrete system, one delay channel: pairs A^(s) + B^(r) - I; μ = d + w/2.
Certificate build_discrete(const DiscreteDelaySystem& sys,
                           const std::optional<Vec>& nu = std::nullopt);
/// Discrete system, several channels: μ_l = d_l + w/(2m).
Certificate build_discrete_multi(const DiscreteDelaySystem& sys,
                                 const std::optional<Vec>& nu = std::nullopt);

/// Validates and dispatches to the builder matching the class tag.
Certificate certify(const SystemDescriptor& sys);

/// Re-evaluates every inequality the functional's decrease relies on.
MarginReport verify_certificate(const SystemDescriptor& sys, const Certificate& cert);

}  // namespace krasovskii
