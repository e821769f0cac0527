#include "krasovskii/certificates.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "krasovskii/lp.h"

namespace krasovskii {
namespace {

// Data shared by the switched-delay and discrete constructions: the
// discrete case is the continuous one with A^(s) replaced by A^(s) - I.
struct DelayFamily {
  std::vector<Mat> a;               // a[mode]
  std::vector<std::vector<Mat>> b;  // b[channel][mode]
};

// Data shared by the coupled and neutral constructions. Pair conditions
// combine a[s], c[s] with b[r], d[r].
struct CoupledFamily {
  std::vector<Mat> a, b, c, d;
};

DelayFamily family_of(const SwitchedDelaySystem& s) { return {s.a, s.b}; }

DelayFamily family_of(const DiscreteDelaySystem& s) {
  DelayFamily fam{s.a, s.b};
  for (Mat& a : fam.a) a -= Mat::Identity(s.n, s.n);
  return fam;
}

CoupledFamily family_of(const CoupledSystem& s) { return {s.a, s.b, s.c, s.d}; }

CoupledFamily family_of(const NeutralSystem& s) {
  CoupledFamily fam;
  const Mat d_tilde = s.d.cwiseAbs();
  for (int k = 0; k < s.modes(); ++k) {
    fam.a.push_back(metzler_majorant(s.a[static_cast<std::size_t>(k)]));
    fam.b.push_back(s.reduced_b(k).cwiseAbs());
    fam.c.push_back(Mat::Identity(s.n, s.n));
    fam.d.push_back(d_tilde);
  }
  return fam;
}

void push_unique(std::vector<Mat>& out, Mat m) {
  if (std::none_of(out.begin(), out.end(), [&](const Mat& u) { return u == m; }))
    out.push_back(std::move(m));
}

std::vector<Mat> tuple_composites(const DelayFamily& fam) {
  const std::size_t modes = fam.a.size();
  std::size_t count = modes;
  for (std::size_t r = 0; r < fam.b.size(); ++r) {
    if (count > kTupleCap / std::max<std::size_t>(modes, 1)) {
      count = kTupleCap + 1;
      break;
    }
    count *= modes;
  }
  if (count > kTupleCap) {
    throw CertificationError(FailureReason::kTupleCapExceeded,
                             "the tuple condition needs more than " + std::to_string(kTupleCap) +
                                 " composite matrices");
  }
  // Sums over channels are formed incrementally; equal partial sums merge.
  const Eigen::Index n = fam.a.front().rows();
  std::vector<Mat> sums{Mat::Zero(n, n)};
  for (const auto& channel : fam.b) {
    std::vector<Mat> next;
    for (const Mat& s : sums)
      for (const Mat& bm : channel) push_unique(next, s + bm);
    sums = std::move(next);
  }
  std::vector<Mat> out;
  for (const Mat& a : fam.a)
    for (const Mat& s : sums) push_unique(out, a + s);
  return out;
}

struct DCondition {
  Vec v;
  std::vector<Mat> inverses;  // (I - d[r])^{-1}
};

DCondition d_condition(const std::vector<Mat>& ds) {
  std::vector<Mat> shifted;
  for (const Mat& d : ds) push_unique(shifted, d - Mat::Identity(d.rows(), d.cols()));
  const auto res = find_common_vector(FeasibilityProblem(shifted));
  if (!res.sat()) {
    for (std::size_t r = 0; r < ds.size(); ++r) {
      if (!schur_cohn_nonneg(ds[r])) {
        throw CertificationError(FailureReason::kDNotSchur,
                                 "D[" + std::to_string(r + 1) + "] is not Schur-Cohn");
      }
    }
    throw CertificationError(FailureReason::kNoCommonV,
                             "every D is Schur-Cohn but no common v ≫ 0 with Dᵀv ≪ v exists");
  }
  DCondition out{*res.witness, {}};
  for (const Mat& d : ds) out.inverses.push_back(m_matrix_inverse(d));
  return out;
}

std::vector<Mat> coupled_composites(const CoupledFamily& fam, const DCondition& dc) {
  std::vector<Mat> out;
  for (std::size_t s = 0; s < fam.a.size(); ++s)
    for (std::size_t r = 0; r < fam.b.size(); ++r)
      push_unique(out, fam.a[s] + fam.b[r] * dc.inverses[r] * fam.c[s]);
  return out;
}

struct Witness {
  Vec nu;
  double slack = 0.0;
};

Witness solve_or_check(const FeasibilityProblem& p, const std::optional<Vec>& nu,
                       FailureReason on_failure, const std::string& what) {
  if (nu) {
    const double margin = check_vector(p, *nu);
    if (!(margin < 0.0)) {
      throw CertificationError(on_failure, "supplied ν does not satisfy " + what);
    }
    return {*nu, -margin};
  }
  const auto res = find_common_vector(p);
  if (!res.sat()) throw CertificationError(on_failure, "no ν ≫ 0 satisfies " + what);
  return {*res.witness, res.slack};
}

double max_entry(const Vec& v) { return v.size() == 0 ? -std::numeric_limits<double>::infinity() : v.maxCoeff(); }

MarginReport finish(std::vector<MarginEntry> entries) {
  MarginReport rep;
  rep.pass = true;
  for (auto& e : entries) rep.pass = rep.pass && e.pass;
  rep.entries = std::move(entries);
  return rep;
}

MarginEntry inequality(std::string family, double worst) {
  return {std::move(family), worst, worst <= -kVerifyMargin};
}

MarginEntry positivity(const Certificate& cert) {
  double lo = cert.nu.size() ? cert.nu.minCoeff() : 0.0;
  for (const Vec& m : cert.mu) lo = std::min(lo, m.size() ? m.minCoeff() : 0.0);
  return {"positivity: -min(ν, μ)", -lo, lo > 0.0};
}

void check_shapes(const Certificate& cert, Eigen::Index n, std::size_t channels,
                  Eigen::Index mu_dim) {
  if (cert.nu.size() != n || cert.mu.size() != channels) {
    throw CertificationError(FailureReason::kClassMismatch,
                             "certificate shape does not match the system");
  }
  for (const Vec& m : cert.mu) {
    if (m.size() != mu_dim) {
      throw CertificationError(FailureReason::kClassMismatch,
                               "certificate μ dimension does not match the system");
    }
  }
}

MarginReport delay_family_margins(const DelayFamily& fam, const Certificate& cert,
                                  std::string_view a_label) {
  const Eigen::Index n = fam.a.front().rows();
  check_shapes(cert, n, fam.b.size(), n);
  Vec mu_sum = Vec::Zero(n);
  for (const Vec& m : cert.mu) mu_sum += m;
  double a_worst = -std::numeric_limits<double>::infinity();
  for (const Mat& a : fam.a) a_worst = std::max(a_worst, max_entry(a.transpose() * cert.nu + mu_sum));
  std::vector<MarginEntry> entries{positivity(cert),
                                   inequality(std::string(a_label) + " + Σ_r μ_r", a_worst)};
  for (std::size_t r = 0; r < fam.b.size(); ++r) {
    double b_worst = -std::numeric_limits<double>::infinity();
    for (const Mat& b : fam.b[r]) b_worst = std::max(b_worst, max_entry(b.transpose() * cert.nu - cert.mu[r]));
    entries.push_back(inequality("B_" + std::to_string(r + 1) + "^(s)ᵀν - μ_" + std::to_string(r + 1), b_worst));
  }
  return finish(std::move(entries));
}

MarginReport coupled_margins(const CoupledFamily& fam, const Certificate& cert,
                             std::string_view a_label, std::string_view b_label) {
  const Eigen::Index n = fam.a.front().rows();
  const Eigen::Index m = fam.d.front().rows();
  check_shapes(cert, n, 1, m);
  const Vec& mu = cert.mu.front();
  double a_worst = -std::numeric_limits<double>::infinity();
  double b_worst = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < fam.a.size(); ++s) {
    a_worst = std::max(a_worst, max_entry(fam.a[s].transpose() * cert.nu + fam.c[s].transpose() * mu));
    const Mat dm = fam.d[s] - Mat::Identity(m, m);
    b_worst = std::max(b_worst, max_entry(fam.b[s].transpose() * cert.nu + dm.transpose() * mu));
  }
  return finish({positivity(cert), inequality(std::string(a_label), a_worst),
                 inequality(std::string(b_label), b_worst)});
}

Certificate delay_family_build(const DelayFamily& fam, const std::optional<Vec>& nu,
                               SystemClass cls) {
  const FeasibilityProblem p(tuple_composites(fam));
  const Witness wit = solve_or_check(p, nu, FailureReason::kInfeasible,
                                     "the composite inequalities; no certificate of this form");
  const Eigen::Index n = p.n;
  const auto channels = static_cast<double>(fam.b.size());

  Certificate cert;
  cert.cls = cls;
  cert.nu = wit.nu;
  cert.derivation.lp_slack = wit.slack;
  cert.derivation.q = Vec::Constant(n, wit.slack);
  for (const auto& channel : fam.b) {
    std::vector<Vec> products;
    for (const Mat& b : channel) products.push_back(b.transpose() * cert.nu);
    Vec w = elementwise_max(products);
    cert.mu.push_back(w + cert.derivation.q / (2.0 * channels));
    cert.derivation.w.push_back(std::move(w));
  }
  Vec mu_sum = Vec::Zero(n);
  for (const Vec& m : cert.mu) mu_sum += m;
  double a_worst = -std::numeric_limits<double>::infinity();
  for (const Mat& a : fam.a) a_worst = std::max(a_worst, max_entry(a.transpose() * cert.nu + mu_sum));
  cert.beta = -a_worst;

  const auto rep = delay_family_margins(fam, cert, "A");
  if (!rep.pass) {
    throw CertificationError(FailureReason::kConstructionFailed,
                             "constructed coefficients fail re-verification");
  }
  return cert;
}

double a_side_of(const CoupledFamily& fam, const Vec& nu, const Vec& mu) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < fam.a.size(); ++s)
    worst = std::max(worst, max_entry(fam.a[s].transpose() * nu + fam.c[s].transpose() * mu));
  return worst;
}

// Smallest μ with (I - d[r]ᵀ) μ >= bnu[r] for every r, starting from a lower
// bound. The map μ ↦ max_r (d[r]ᵀμ + bnu[r]) is monotone and contracts in
// the v-weighted max norm, so the iteration increases to the least element.
Vec least_b_side(const std::vector<Mat>& d, const std::vector<Vec>& bnu, Vec mu) {
  constexpr int kMaxIterations = 1000000;
  for (int it = 0; it < kMaxIterations; ++it) {
    Vec next = d.front().transpose() * mu + bnu.front();
    for (std::size_t r = 1; r < d.size(); ++r) next = next.cwiseMax(d[r].transpose() * mu + bnu[r]);
    next = next.cwiseMax(mu);
    const double change = (next - mu).cwiseAbs().maxCoeff();
    mu = std::move(next);
    if (change <= 1e-15 * std::max(1.0, mu.cwiseAbs().maxCoeff())) break;
  }
  return mu;
}

// Solves for ν and μ together: maximize t subject to every A-side and
// B-side inequality holding with margin t. The pair condition is necessary
// for this system but not sufficient once B or D depend on the mode.
std::optional<std::pair<Vec, Vec>> joint_coefficients(const CoupledFamily& fam) {
  const Eigen::Index n = fam.a.front().rows();
  const Eigen::Index m = fam.d.front().rows();
  const Eigen::Index vars = n + m + 2;
  std::vector<Mat> a_rows, b_rows;  // [ν-part | μ-part] per family member
  for (std::size_t s = 0; s < fam.a.size(); ++s) {
    Mat row(n, n + m);
    row << fam.a[s].transpose(), fam.c[s].transpose();
    a_rows.push_back(row);
  }
  for (std::size_t r = 0; r < fam.b.size(); ++r) {
    Mat row(m, n + m);
    row << fam.b[r].transpose(), (fam.d[r] - Mat::Identity(m, m)).transpose();
    b_rows.push_back(row);
  }
  Eigen::Index rows = n;
  for (const Mat& r : a_rows) rows += r.rows();
  for (const Mat& r : b_rows) rows += r.rows();

  lp::LinearProgram prog;
  prog.a = Mat::Zero(rows, vars);
  prog.b = Vec::Zero(rows);
  prog.c = Vec::Zero(vars);
  prog.c(n + m) = 1.0;
  prog.c(n + m + 1) = -1.0;
  Eigen::Index at = 0;
  auto add = [&](const Mat& block) {
    for (Eigen::Index i = 0; i < block.rows(); ++i, ++at) {
      prog.a.block(at, 0, 1, n + m) = block.row(i);
      prog.a(at, n + m) = 1.0;
      prog.a(at, n + m + 1) = -1.0;
      prog.b(at) = -block.row(i).head(n).sum();  // ν = e + ν'
    }
  };
  for (const Mat& r : a_rows) add(r);
  for (const Mat& r : b_rows) add(r);
  for (Eigen::Index j = 0; j < n; ++j, ++at) {
    prog.a(at, j) = 1.0;
    prog.b(at) = kNuCap - 1.0;
  }
  const auto sol = lp::solve(prog);
  if (sol.status != lp::Status::kOptimal) return std::nullopt;
  if (!(sol.z(n + m) - sol.z(n + m + 1) > kStrictSlack)) return std::nullopt;
  Vec nu = Vec::Ones(n) + sol.z.head(n);
  Vec mu = sol.z.segment(n, m);
  const double scale = nu.minCoeff();
  return std::pair{Vec(nu / scale), Vec(mu / scale)};
}

Certificate coupled_build(const CoupledFamily& fam, const std::optional<Vec>& nu_in,
                          SystemClass cls) {
  const DCondition dc = d_condition(fam.d);
  const FeasibilityProblem p(coupled_composites(fam, dc));
  const Witness wit = solve_or_check(p, nu_in, FailureReason::kCompositeNotHurwitz,
                                     "the composite condition (A + B(I-D)⁻¹C)ᵀν ≪ 0");
  const Vec& nu = wit.nu;
  const Eigen::Index m = fam.d.front().rows();

  Certificate cert;
  cert.cls = cls;
  cert.nu = nu;
  cert.derivation.lp_slack = wit.slack;
  cert.derivation.v = dc.v;

  std::vector<Vec> u, bnu;
  for (std::size_t r = 0; r < fam.b.size(); ++r) {
    bnu.push_back(fam.b[r].transpose() * nu);
    u.push_back(dc.inverses[r].transpose() * bnu.back());
  }
  Vec base = elementwise_max(u);
  const double scale = std::max(1.0, base.cwiseAbs().maxCoeff());
  bool proof_ok = true;
  for (std::size_t r = 0; r < fam.d.size(); ++r) {
    const Mat dm = fam.d[r] - Mat::Identity(m, m);
    if (max_entry(dm.transpose() * (base - u[r])) > 1e-12 * scale) proof_ok = false;
  }
  if (!proof_ok) {
    base = least_b_side(fam.d, bnu, base);
    cert.derivation.construction = "least_b_side";
  }

  auto a_side = [&](const Vec& mu) { return a_side_of(fam, nu, mu); };
  const double a0 = a_side(base);
  if (!(a0 < 0.0)) {
    // For a fixed ν the least B-feasible μ is optimal on the A-side, so a
    // supplied ν cannot be rescued; otherwise ν is re-chosen jointly with μ.
    const auto joint = nu_in ? std::nullopt : joint_coefficients(fam);
    if (!joint) {
      throw CertificationError(
          FailureReason::kNoFunctional,
          nu_in ? "no μ ≫ 0 meets both inequality families for the supplied ν"
                : "the composite condition holds but no ν, μ ≫ 0 meet both inequality families");
    }
    cert.nu = joint->first;
    cert.mu.push_back(joint->second);
    cert.derivation.w.push_back(joint->second);
    cert.derivation.construction = "joint_lp";
    cert.derivation.lp_slack = -check_vector(p, cert.nu);
    cert.beta = -a_side_of(fam, cert.nu, cert.mu.front());
    if (!coupled_margins(fam, cert, "A", "B").pass) {
      throw CertificationError(FailureReason::kConstructionFailed,
                               "constructed coefficients fail re-verification");
    }
    return cert;
  }
  double eps = 1.0;
  int halvings = 0;
  while (a_side(base + eps * dc.v) > 0.5 * a0) {
    if (++halvings > kMaxHalvings) {
      throw CertificationError(FailureReason::kEpsilonExhausted,
                               "ε search exhausted after " + std::to_string(kMaxHalvings) +
                                   " halvings");
    }
    eps *= 0.5;
  }
  cert.mu.push_back(base + eps * dc.v);
  cert.derivation.w.push_back(base);
  cert.derivation.epsilon = eps;
  cert.derivation.halvings = halvings;
  cert.beta = -a_side(cert.mu.front());

  const auto rep = coupled_margins(fam, cert, "A", "B");
  if (!rep.pass) {
    throw CertificationError(FailureReason::kConstructionFailed,
                             "constructed coefficients fail re-verification");
  }
  return cert;
}

}  // namespace

std::string_view to_string(FailureReason r) {
  switch (r) {
    case FailureReason::kInvalidSystem:
      return "structurally invalid system";
    case FailureReason::kInfeasible:
      return "no certificate of this form";
    case FailureReason::kTupleCapExceeded:
      return "tuple cap exceeded";
    case FailureReason::kDNotSchur:
      return "D not Schur-Cohn";
    case FailureReason::kNoCommonV:
      return "no common v for the D-condition";
    case FailureReason::kCompositeNotHurwitz:
      return "composite not Hurwitz";
    case FailureReason::kEpsilonExhausted:
      return "epsilon search exhausted";
    case FailureReason::kNoFunctional:
      return "no functional of this form";
    case FailureReason::kConstructionFailed:
      return "construction failed";
    case FailureReason::kClassMismatch:
      return "class mismatch";
  }
  return "unknown";
}

CertificationError::CertificationError(FailureReason reason, const std::string& detail)
    : Error(std::string(to_string(reason)) + ": " + detail), reason_(reason) {}

FeasibilityProblem theorem_condition(const SystemDescriptor& sys) {
  switch (sys.cls) {
    case SystemClass::kSwitchedDelay:
      return FeasibilityProblem(
          tuple_composites(family_of(std::get<SwitchedDelaySystem>(sys.system))));
    case SystemClass::kDiscrete:
      return FeasibilityProblem(
          tuple_composites(family_of(std::get<DiscreteDelaySystem>(sys.system))));
    case SystemClass::kCoupled:
    case SystemClass::kSwitchedCoupled: {
      const auto fam = family_of(std::get<CoupledSystem>(sys.system));
      return FeasibilityProblem(coupled_composites(fam, d_condition(fam.d)));
    }
    case SystemClass::kNeutral: {
      const auto fam = family_of(std::get<NeutralSystem>(sys.system));
      return FeasibilityProblem(coupled_composites(fam, d_condition(fam.d)));
    }
  }
  throw Error("theorem_condition: unknown class");
}

Certificate build_switched_delay(const SwitchedDelaySystem& sys, const std::optional<Vec>& nu) {
  if (sys.channels() != 1) throw Error("build_switched_delay: expects a single delay channel");
  return delay_family_build(family_of(sys), nu, SystemClass::kSwitchedDelay);
}

Certificate build_multi_delay(const SwitchedDelaySystem& sys, const std::optional<Vec>& nu) {
  return delay_family_build(family_of(sys), nu, SystemClass::kSwitchedDelay);
}

Certificate build_coupled(const CoupledSystem& sys, const std::optional<Vec>& nu) {
  if (sys.modes() != 1) throw Error("build_coupled: expects a single mode");
  return coupled_build(family_of(sys), nu, SystemClass::kCoupled);
}

Certificate build_switched_coupled(const CoupledSystem& sys, const std::optional<Vec>& nu) {
  return coupled_build(family_of(sys), nu, SystemClass::kSwitchedCoupled);
}

Certificate build_neutral(const NeutralSystem& sys, const std::optional<Vec>& nu) {
  return coupled_build(family_of(sys), nu, SystemClass::kNeutral);
}

Certificate build_discrete(const DiscreteDelaySystem& sys, const std::optional<Vec>& nu) {
  if (sys.channels() != 1) throw Error("build_discrete: expects a single delay channel");
  return delay_family_build(family_of(sys), nu, SystemClass::kDiscrete);
}

Certificate build_discrete_multi(const DiscreteDelaySystem& sys, const std::optional<Vec>& nu) {
  return delay_family_build(family_of(sys), nu, SystemClass::kDiscrete);
}

Certificate certify(const SystemDescriptor& sys) {
  const auto violations = validate(sys);
  if (!violations.empty()) {
    throw CertificationError(FailureReason::kInvalidSystem, violations.front().message());
  }
  switch (sys.cls) {
    case SystemClass::kSwitchedDelay: {
      const auto& s = std::get<SwitchedDelaySystem>(sys.system);
      return s.channels() == 1 ? build_switched_delay(s) : build_multi_delay(s);
    }
    case SystemClass::kCoupled:
      return build_coupled(std::get<CoupledSystem>(sys.system));
    case SystemClass::kSwitchedCoupled:
      return build_switched_coupled(std::get<CoupledSystem>(sys.system));
    case SystemClass::kNeutral:
      return build_neutral(std::get<NeutralSystem>(sys.system));
    case SystemClass::kDiscrete: {
      const auto& s = std::get<DiscreteDelaySystem>(sys.system);
      return s.channels() == 1 ? build_discrete(s) : build_discrete_multi(s);
    }
  }
  throw Error("certify: unknown class");
}

MarginReport verify_certificate(const SystemDescriptor& sys, const Certificate& cert) {
  if (cert.cls != sys.cls) {
    throw CertificationError(FailureReason::kClassMismatch,
                             "certificate is for class " + std::string(to_string(cert.cls)) +
                                 ", system is " + std::string(to_string(sys.cls)));
  }
  switch (sys.cls) {
    case SystemClass::kSwitchedDelay:
      return delay_family_margins(family_of(std::get<SwitchedDelaySystem>(sys.system)), cert,
                                  "A^(s)ᵀν");
    case SystemClass::kDiscrete:
      return delay_family_margins(family_of(std::get<DiscreteDelaySystem>(sys.system)), cert,
                                  "(A^(s) - I)ᵀν");
    case SystemClass::kCoupled:
    case SystemClass::kSwitchedCoupled:
      return coupled_margins(family_of(std::get<CoupledSystem>(sys.system)), cert,
                             "A^(s)ᵀν + C^(s)ᵀμ", "B^(s)ᵀν + (D^(s) - I)ᵀμ");
    case SystemClass::kNeutral:
      return coupled_margins(family_of(std::get<NeutralSystem>(sys.system)), cert,
                             "Ã^(s)ᵀν + μ", "B̃^(s)ᵀν + (D̃ - I)ᵀμ");
  }
  throw Error("verify_certificate: unknown class");
}

}  // namespace krasovskii
