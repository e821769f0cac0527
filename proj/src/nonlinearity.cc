#include "krasovskii/nonlinearity.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace krasovskii {
namespace {

std::vector<double> sample_grid() {
  std::vector<double> xs;
  constexpr int kPerSide = 5000;
  for (int i = 0; i < kPerSide; ++i) {
    const double e = -6.0 + 9.0 * i / (kPerSide - 1);
    const double x = std::pow(10.0, e);
    xs.push_back(x);
    xs.push_back(-x);
  }
  return xs;
}

const std::vector<double>& grid() {
  static const std::vector<double> xs = sample_grid();
  return xs;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

double ScalarNonlinearity::operator()(double x) const {
  switch (kind) {
    case NonlinearityKind::kIdentity:
      return x;
    case NonlinearityKind::kTanhScaled:
      return p1 * std::tanh(x);
    case NonlinearityKind::kCubicSign:
      return x * x * x / (1.0 + x * x);
    case NonlinearityKind::kSaturation:
      return std::clamp(x, -p1, p1);
    case NonlinearityKind::kPiecewiseLinear: {
      const double ax = std::abs(x);
      const double mag = ax <= 1.0 ? p1 * ax : p1 + p2 * (ax - 1.0);
      return std::copysign(mag, x);
    }
  }
  return x;
}

std::string ScalarNonlinearity::name() const {
  switch (kind) {
    case NonlinearityKind::kIdentity:
      return "identity";
    case NonlinearityKind::kTanhScaled:
      return "tanh:" + num(p1);
    case NonlinearityKind::kCubicSign:
      return "cubic";
    case NonlinearityKind::kSaturation:
      return "saturation:" + num(p1);
    case NonlinearityKind::kPiecewiseLinear:
      return "pwl:" + num(p1) + ":" + num(p2);
  }
  return "identity";
}

bool ScalarNonlinearity::radially_unbounded() const {
  switch (kind) {
    case NonlinearityKind::kTanhScaled:
    case NonlinearityKind::kSaturation:
      return false;
    case NonlinearityKind::kPiecewiseLinear:
      return p2 > 0.0;
    default:
      return true;
  }
}

bool satisfies_sign_condition(const ScalarNonlinearity& f) {
  return std::all_of(grid().begin(), grid().end(), [&](double x) {
    const double fx = f(x);
    return std::isfinite(fx) && x * fx > 0.0;
  });
}

bool is_discrete_admissible(const ScalarNonlinearity& f) {
  return satisfies_sign_condition(f) &&
         std::all_of(grid().begin(), grid().end(),
                     [&](double x) { return std::abs(f(x)) <= std::abs(x); });
}

Nonlinearity::Nonlinearity(std::vector<ScalarNonlinearity> components)
    : components_(std::move(components)) {}

Nonlinearity Nonlinearity::identity(int n) { return uniform(n, ScalarNonlinearity{}); }

Nonlinearity Nonlinearity::uniform(int n, ScalarNonlinearity component) {
  return Nonlinearity(std::vector<ScalarNonlinearity>(static_cast<std::size_t>(n), component));
}

Vec Nonlinearity::apply(const Vec& x) const {
  if (x.size() != dim()) throw DimensionError("Nonlinearity::apply: dimension mismatch");
  Vec out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = components_[static_cast<std::size_t>(i)](x(i));
  return out;
}

bool Nonlinearity::is_identity() const {
  return std::all_of(components_.begin(), components_.end(), [](const ScalarNonlinearity& c) {
    return c.kind == NonlinearityKind::kIdentity;
  });
}

bool Nonlinearity::discrete_admissible() const {
  return std::all_of(components_.begin(), components_.end(),
                     [](const ScalarNonlinearity& c) { return is_discrete_admissible(c); });
}

std::string Nonlinearity::name() const {
  if (components_.empty()) return "";
  const bool same = std::all_of(components_.begin(), components_.end(), [&](const auto& c) {
    return c.name() == components_.front().name();
  });
  if (same) return components_.front().name();
  std::string out;
  for (const auto& c : components_) {
    if (!out.empty()) out += ",";
    out += c.name();
  }
  return out;
}

Vec eval_nonlinearity(const Nonlinearity& f, const Vec& x) { return f.apply(x); }

ScalarNonlinearity parse_scalar_nonlinearity(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.empty()) throw Error("empty nonlinearity name");
  auto param = [&](std::size_t i) {
    if (parts.size() <= i) throw Error("nonlinearity '" + spec + "' is missing a parameter");
    try {
      return std::stod(parts[i]);
    } catch (const std::exception&) {
      throw Error("nonlinearity '" + spec + "' has a malformed parameter");
    }
  };
  ScalarNonlinearity f;
  const std::string& kind = parts[0];
  if (kind == "identity") {
    f.kind = NonlinearityKind::kIdentity;
  } else if (kind == "tanh") {
    f = {NonlinearityKind::kTanhScaled, parts.size() > 1 ? param(1) : 1.0, 0.0};
  } else if (kind == "cubic") {
    f.kind = NonlinearityKind::kCubicSign;
  } else if (kind == "saturation") {
    f = {NonlinearityKind::kSaturation, parts.size() > 1 ? param(1) : 1.0, 0.0};
  } else if (kind == "pwl") {
    f = {NonlinearityKind::kPiecewiseLinear, param(1), param(2)};
  } else {
    throw Error("unknown nonlinearity '" + kind + "'");
  }
  if (!satisfies_sign_condition(f)) {
    throw Error("nonlinearity '" + spec + "' violates x f(x) > 0");
  }
  return f;
}

const std::vector<RegistryEntry>& nonlinearity_registry() {
  static const std::vector<RegistryEntry> entries = {
      {"identity", "linear, f(x) = x", {NonlinearityKind::kIdentity, 1.0, 0.0}},
      {"tanh", "bounded, f(x) = γ tanh(x); |f| <= |x| iff γ <= 1",
       {NonlinearityKind::kTanhScaled, 1.0, 0.0}},
      {"cubic", "f(x) = x³/(1+x²), flat at the origin, asymptotically linear",
       {NonlinearityKind::kCubicSign, 1.0, 0.0}},
      {"saturation", "bounded, f(x) = clamp(x, -L, L)", {NonlinearityKind::kSaturation, 1.0, 0.0}},
      {"pwl", "slope s1 on [-1, 1], slope s2 outside", {NonlinearityKind::kPiecewiseLinear, 0.5, 1.5}},
  };
  return entries;
}

Nonlinearity random_nonlinearity(int n, std::mt19937_64& rng, bool discrete_only) {
  std::uniform_int_distribution<int> pick(0, 4);
  std::vector<ScalarNonlinearity> comps;
  for (int i = 0; i < n; ++i) {
    ScalarNonlinearity f;
    switch (pick(rng)) {
      case 0:
        f.kind = NonlinearityKind::kIdentity;
        break;
      case 1: {
        std::uniform_real_distribution<double> g(0.2, discrete_only ? 1.0 : 3.0);
        f = {NonlinearityKind::kTanhScaled, g(rng), 0.0};
        break;
      }
      case 2:
        f.kind = NonlinearityKind::kCubicSign;
        break;
      case 3: {
        std::uniform_real_distribution<double> l(0.1, 2.0);
        f = {NonlinearityKind::kSaturation, l(rng), 0.0};
        break;
      }
      default: {
        std::uniform_real_distribution<double> s1(0.2, discrete_only ? 1.0 : 2.0);
        std::uniform_real_distribution<double> s2(0.0, discrete_only ? 1.0 : 2.0);
        f = {NonlinearityKind::kPiecewiseLinear, s1(rng), s2(rng)};
        break;
      }
    }
    comps.push_back(f);
  }
  return Nonlinearity(std::move(comps));
}

}  // namespace krasovskii
