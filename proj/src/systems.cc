#include "krasovskii/systems.h"

#include <cmath>
#include <sstream>

namespace krasovskii {
namespace {

std::string indexed(std::string_view base, std::initializer_list<int> idx) {
  std::string s(base);
  for (int i : idx) s += "[" + std::to_string(i + 1) + "]";
  return s;
}

class Checker {
 public:
  explicit Checker(std::vector<Violation>& out) : out_(out) {}

  // Returns false (after recording) when the shape is wrong; entry checks
  // are skipped for such matrices.
  bool shape(const Mat& m, Eigen::Index rows, Eigen::Index cols, const std::string& name) {
    if (m.rows() != rows || m.cols() != cols) {
      std::ostringstream os;
      os << "dimension: expected " << rows << "x" << cols << ", got " << m.rows() << "x"
         << m.cols();
      out_.push_back({name, 0, 0, os.str()});
      return false;
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        if (!std::isfinite(m(i, j))) out_.push_back({name, int(i) + 1, int(j) + 1, "finite"});
    return true;
  }

  void metzler(const Mat& m, const std::string& name) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        if (i != j && m(i, j) < -kStructureTol)
          out_.push_back({name, int(i) + 1, int(j) + 1, "Metzler: off-diagonal entry is negative"});
  }

  void nonnegative(const Mat& m, const std::string& name) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        if (m(i, j) < -kStructureTol)
          out_.push_back({name, int(i) + 1, int(j) + 1, "nonnegative: entry is negative"});
  }

  void whole(const std::string& name, const std::string& rule) { out_.push_back({name, 0, 0, rule}); }

 private:
  std::vector<Violation>& out_;
};

void check_delay(Checker& ck, double tau, const std::string& name) {
  if (!std::isfinite(tau) || tau < 0.0) ck.whole(name, "delay must be finite and nonnegative");
}

void validate_switched(const SwitchedDelaySystem& s, Checker& ck) {
  if (s.n < 1) return ck.whole("n", "state dimension must be positive");
  if (s.a.empty()) return ck.whole("A", "at least one mode required");
  if (s.b.empty()) return ck.whole("B", "at least one delay channel required");
  if (s.delays.size() != s.b.size()) ck.whole("delays", "one delay per B channel required");
  for (int k = 0; k < s.modes(); ++k) {
    const auto name = indexed("A", {k});
    if (ck.shape(s.a[k], s.n, s.n, name)) ck.metzler(s.a[k], name);
  }
  for (int r = 0; r < s.channels(); ++r) {
    if (static_cast<int>(s.b[r].size()) != s.modes()) {
      ck.whole(indexed("B", {r}), "one matrix per mode required");
      continue;
    }
    for (int k = 0; k < s.modes(); ++k) {
      const auto name = indexed("B", {r, k});
      if (ck.shape(s.b[r][k], s.n, s.n, name)) ck.nonnegative(s.b[r][k], name);
    }
  }
  for (std::size_t r = 0; r < s.delays.size(); ++r)
    check_delay(ck, s.delays[r], indexed("delays", {int(r)}));
}

void validate_coupled(const CoupledSystem& s, bool single_mode, Checker& ck) {
  if (s.n < 1 || s.m < 1) return ck.whole("n/m", "dimensions must be positive");
  if (s.a.empty()) return ck.whole("A", "at least one mode required");
  if (single_mode && s.modes() != 1) ck.whole("N", "class coupled requires a single mode");
  const auto n_modes = s.a.size();
  if (s.b.size() != n_modes || s.c.size() != n_modes || s.d.size() != n_modes) {
    return ck.whole("B/C/D", "one matrix per mode required");
  }
  for (int k = 0; k < s.modes(); ++k) {
    auto name = indexed("A", {k});
    if (ck.shape(s.a[k], s.n, s.n, name)) ck.metzler(s.a[k], name);
    name = indexed("B", {k});
    if (ck.shape(s.b[k], s.n, s.m, name)) ck.nonnegative(s.b[k], name);
    name = indexed("C", {k});
    if (ck.shape(s.c[k], s.m, s.n, name)) ck.nonnegative(s.c[k], name);
    name = indexed("D", {k});
    if (ck.shape(s.d[k], s.m, s.m, name)) ck.nonnegative(s.d[k], name);
  }
  check_delay(ck, s.delay, "delay");
}

void validate_neutral(const NeutralSystem& s, Checker& ck) {
  if (s.n < 1) return ck.whole("n", "state dimension must be positive");
  if (s.a.empty()) return ck.whole("A", "at least one mode required");
  if (s.g.size() != s.a.size()) return ck.whole("G", "one matrix per mode required");
  for (int k = 0; k < s.modes(); ++k) {
    ck.shape(s.a[k], s.n, s.n, indexed("A", {k}));
    ck.shape(s.g[k], s.n, s.n, indexed("G", {k}));
  }
  if (ck.shape(s.d, s.n, s.n, "D") && s.d.allFinite() &&
      !schur_cohn_nonneg(s.d.cwiseAbs())) {
    ck.whole("D", "D̃ not Schur-Cohn");
  }
  check_delay(ck, s.delay, "delay");
}

void validate_discrete(const DiscreteDelaySystem& s, Checker& ck) {
  if (s.n < 1) return ck.whole("n", "state dimension must be positive");
  if (s.a.empty()) return ck.whole("A", "at least one mode required");
  if (s.b.empty()) return ck.whole("B", "at least one delay channel required");
  if (s.delays.size() != s.b.size()) ck.whole("delays", "one delay per B channel required");
  for (int k = 0; k < s.modes(); ++k) {
    const auto name = indexed("A", {k});
    if (ck.shape(s.a[k], s.n, s.n, name)) ck.nonnegative(s.a[k], name);
  }
  for (int r = 0; r < s.channels(); ++r) {
    if (static_cast<int>(s.b[r].size()) != s.modes()) {
      ck.whole(indexed("B", {r}), "one matrix per mode required");
      continue;
    }
    for (int k = 0; k < s.modes(); ++k) {
      const auto name = indexed("B", {r, k});
      if (ck.shape(s.b[r][k], s.n, s.n, name)) ck.nonnegative(s.b[r][k], name);
    }
  }
  for (std::size_t r = 0; r < s.delays.size(); ++r)
    if (s.delays[r] < 0) ck.whole(indexed("delays", {int(r)}), "delay must be nonnegative");
}

}  // namespace

std::string_view to_string(SystemClass c) {
  switch (c) {
    case SystemClass::kSwitchedDelay:
      return "switched_delay";
    case SystemClass::kCoupled:
      return "coupled";
    case SystemClass::kSwitchedCoupled:
      return "switched_coupled";
    case SystemClass::kNeutral:
      return "neutral";
    case SystemClass::kDiscrete:
      return "discrete";
  }
  return "switched_delay";
}

SystemClass parse_system_class(std::string_view name) {
  for (auto c : {SystemClass::kSwitchedDelay, SystemClass::kCoupled,
                 SystemClass::kSwitchedCoupled, SystemClass::kNeutral, SystemClass::kDiscrete}) {
    if (to_string(c) == name) return c;
  }
  throw Error("unknown system class '" + std::string(name) + "'");
}

bool CoupledSystem::shared_b_d() const {
  for (std::size_t k = 1; k < b.size(); ++k)
    if (b[k] != b[0] || d[k] != d[0]) return false;
  return true;
}

int DiscreteDelaySystem::max_delay() const {
  int m = 0;
  for (int d : delays) m = std::max(m, d);
  return m;
}

int SystemDescriptor::state_dim() const {
  return std::visit([](const auto& s) { return s.n; }, system);
}

int SystemDescriptor::modes() const {
  return std::visit([](const auto& s) { return s.modes(); }, system);
}

std::string Violation::message() const {
  std::ostringstream os;
  os << matrix;
  if (row > 0) os << "(" << row << "," << col << ")";
  os << ": " << rule;
  return os.str();
}

std::vector<Violation> validate(const SystemDescriptor& sys) {
  std::vector<Violation> out;
  Checker ck(out);
  auto expect = [&](bool ok) {
    if (!ok) ck.whole("class", "payload does not match class tag");
    return ok;
  };
  switch (sys.cls) {
    case SystemClass::kSwitchedDelay:
      if (expect(std::holds_alternative<SwitchedDelaySystem>(sys.system)))
        validate_switched(std::get<SwitchedDelaySystem>(sys.system), ck);
      break;
    case SystemClass::kCoupled:
    case SystemClass::kSwitchedCoupled:
      if (expect(std::holds_alternative<CoupledSystem>(sys.system)))
        validate_coupled(std::get<CoupledSystem>(sys.system), sys.cls == SystemClass::kCoupled, ck);
      break;
    case SystemClass::kNeutral:
      if (expect(std::holds_alternative<NeutralSystem>(sys.system)))
        validate_neutral(std::get<NeutralSystem>(sys.system), ck);
      break;
    case SystemClass::kDiscrete:
      if (expect(std::holds_alternative<DiscreteDelaySystem>(sys.system)))
        validate_discrete(std::get<DiscreteDelaySystem>(sys.system), ck);
      break;
  }
  return out;
}

}  // namespace krasovskii
