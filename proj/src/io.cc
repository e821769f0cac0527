#include "krasovskii/io.h"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace krasovskii {
namespace {

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }
std::string key(const std::string& path, const std::string& k) { return path + "." + k; }

const Json& field(const Json& obj, const std::string& path, const std::string& k) {
  auto it = obj.find(k);
  if (it == obj.end()) throw ParseError(key(path, k), "missing required field");
  return *it;
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(path, "number is not finite");
  return v;
}

int integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ParseError(path, "expected an integer");
  const auto v = j.get<long long>();
  if (v < 0 || v > 1'000'000) throw ParseError(path, "integer out of range [0, 1000000]");
  return static_cast<int>(v);
}

const Json& array(const Json& j, const std::string& path, std::size_t expected = 0) {
  if (!j.is_array()) throw ParseError(path, "expected an array");
  if (expected > 0 && j.size() != expected)
    throw ParseError(path, "expected " + std::to_string(expected) + " entries, got " + std::to_string(j.size()));
  return j;
}

Mat matrix(const Json& j, const std::string& path, int rows, int cols) {
  array(j, path, static_cast<std::size_t>(rows));
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const std::string rp = at(path, static_cast<std::size_t>(i));
    const Json& row = array(j[static_cast<std::size_t>(i)], rp, static_cast<std::size_t>(cols));
    for (int c = 0; c < cols; ++c) m(i, c) = number(row[static_cast<std::size_t>(c)], at(rp, static_cast<std::size_t>(c)));
  }
  return m;
}

std::vector<Mat> per_mode(const Json& obj, const std::string& path, const std::string& k, int modes, int rows,
                          int cols) {
  const std::string p = key(path, k);
  const Json& j = array(field(obj, path, k), p, static_cast<std::size_t>(modes));
  std::vector<Mat> out;
  for (int s = 0; s < modes; ++s) out.push_back(matrix(j[static_cast<std::size_t>(s)], at(p, static_cast<std::size_t>(s)), rows, cols));
  return out;
}

std::vector<std::vector<Mat>> channels(const Json& obj, const std::string& path, int modes, int n) {
  const std::string p = key(path, "B");
  const Json& j = array(field(obj, path, "B"), p);
  if (j.empty()) throw ParseError(p, "at least one delay channel required");
  std::vector<std::vector<Mat>> out;
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string cp = at(p, r);
    const Json& ch = array(j[r], cp, static_cast<std::size_t>(modes));
    out.emplace_back();
    for (int s = 0; s < modes; ++s) out.back().push_back(matrix(ch[static_cast<std::size_t>(s)], at(cp, static_cast<std::size_t>(s)), n, n));
  }
  return out;
}

int dimension(const Json& obj, const std::string& k) {
  const int v = integer(field(obj, "$", k), key("$", k));
  if (v < 1) throw ParseError(key("$", k), "dimension must be at least 1");
  return v;
}

double delay(const Json& j, const std::string& path) {
  const double v = number(j, path);
  if (v < 0.0) throw ParseError(path, "delay must be nonnegative");
  return v;
}

Json to_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json to_json(const std::vector<Mat>& ms) {
  Json out = Json::array();
  for (const auto& m : ms) out.push_back(to_json(m));
  return out;
}

Json to_json(const std::vector<std::vector<Mat>>& ms) {
  Json out = Json::array();
  for (const auto& ch : ms) out.push_back(to_json(ch));
  return out;
}

Vec vector_of(const Json& j, const std::string& path) {
  array(j, path);
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], at(path, i));
  return v;
}

}  // namespace

ParseError::ParseError(std::string path, const std::string& what)
    : Error(path + ": " + what), path_(std::move(path)) {}

SystemDescriptor system_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("$", "expected an object");
  const Json& cls_json = field(j, "$", "class");
  if (!cls_json.is_string()) throw ParseError("$.class", "expected a string");
  SystemDescriptor out;
  try {
    out.cls = parse_system_class(cls_json.get<std::string>());
  } catch (const Error&) {
    throw ParseError("$.class", "unknown class \"" + cls_json.get<std::string>() +
                                    "\" (switched_delay, coupled, switched_coupled, neutral, discrete)");
  }
  std::set<std::string> allowed{"class", "n", "N", "A", "labels"};
  const int n = dimension(j, "n");
  const Json& a_json = array(field(j, "$", "A"), "$.A");
  int modes = static_cast<int>(a_json.size());
  if (j.contains("N")) {
    modes = dimension(j, "N");
    array(a_json, "$.A", static_cast<std::size_t>(modes));
  } else if (modes == 0) {
    throw ParseError("$.A", "at least one mode required");
  }

  switch (out.cls) {
    case SystemClass::kSwitchedDelay:
    case SystemClass::kDiscrete: {
      allowed.insert({"B", "delays"});
      auto a = per_mode(j, "$", "A", modes, n, n);
      auto b = channels(j, "$", modes, n);
      const Json& d = array(field(j, "$", "delays"), "$.delays", b.size());
      if (out.cls == SystemClass::kSwitchedDelay) {
        SwitchedDelaySystem s{n, std::move(a), std::move(b), {}};
        for (std::size_t r = 0; r < d.size(); ++r) s.delays.push_back(delay(d[r], at("$.delays", r)));
        out.system = std::move(s);
      } else {
        DiscreteDelaySystem s{n, std::move(a), std::move(b), {}};
        for (std::size_t r = 0; r < d.size(); ++r) s.delays.push_back(integer(d[r], at("$.delays", r)));
        out.system = std::move(s);
      }
      break;
    }
    case SystemClass::kCoupled:
    case SystemClass::kSwitchedCoupled: {
      allowed.insert({"m", "B", "C", "D", "delay"});
      CoupledSystem s;
      s.n = n;
      s.m = dimension(j, "m");
      s.a = per_mode(j, "$", "A", modes, n, n);
      s.b = per_mode(j, "$", "B", modes, n, s.m);
      s.c = per_mode(j, "$", "C", modes, s.m, n);
      s.d = per_mode(j, "$", "D", modes, s.m, s.m);
      s.delay = delay(field(j, "$", "delay"), "$.delay");
      out.system = std::move(s);
      break;
    }
    case SystemClass::kNeutral: {
      allowed.insert({"G", "D", "delay"});
      NeutralSystem s;
      s.n = n;
      s.a = per_mode(j, "$", "A", modes, n, n);
      s.g = per_mode(j, "$", "G", modes, n, n);
      s.d = matrix(field(j, "$", "D"), "$.D", n, n);
      s.delay = delay(field(j, "$", "delay"), "$.delay");
      out.system = std::move(s);
      break;
    }
  }

  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ParseError(key("$", k), "unknown field for class " + std::string(to_string(out.cls)));
  if (j.contains("labels")) {
    const Json& labels = j["labels"];
    if (!labels.is_object()) throw ParseError("$.labels", "expected an object of strings");
    for (const auto& [k, v] : labels.items()) {
      if (!v.is_string()) throw ParseError(key("$.labels", k), "expected a string");
      out.labels[k] = v.get<std::string>();
    }
  }
  return out;
}

Json system_to_json(const SystemDescriptor& sys) {
  Json j;
  j["class"] = std::string(to_string(sys.cls));
  j["n"] = sys.state_dim();
  j["N"] = sys.modes();
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        j["A"] = to_json(s.a);
        if constexpr (std::is_same_v<T, SwitchedDelaySystem> || std::is_same_v<T, DiscreteDelaySystem>) {
          j["B"] = to_json(s.b);
          j["delays"] = s.delays;
        } else if constexpr (std::is_same_v<T, CoupledSystem>) {
          j["m"] = s.m;
          j["B"] = to_json(s.b);
          j["C"] = to_json(s.c);
          j["D"] = to_json(s.d);
          j["delay"] = s.delay;
        } else {
          j["G"] = to_json(s.g);
          j["D"] = to_json(s.d);
          j["delay"] = s.delay;
        }
      },
      sys.system);
  if (!sys.labels.empty()) j["labels"] = sys.labels;
  return j;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("$", "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError("$", std::string("invalid JSON: ") + e.what());
  }
}

std::string input_hash(const SystemDescriptor& sys) {
  const std::string text = system_to_json(sys).dump();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

Json certificate_to_json(const Certificate& cert) {
  Json mu = Json::array();
  for (const auto& m : cert.mu) mu.push_back(to_json(m));
  Json w = Json::array();
  for (const auto& v : cert.derivation.w) w.push_back(to_json(v));
  const auto& d = cert.derivation;
  return {{"class", std::string(to_string(cert.cls))},
          {"nu", to_json(cert.nu)},
          {"mu", mu},
          {"beta", cert.beta},
          {"derivation",
           {{"construction", d.construction},
            {"q", to_json(d.q)},
            {"w", w},
            {"v", to_json(d.v)},
            {"epsilon", d.epsilon},
            {"halvings", d.halvings},
            {"lp_slack", d.lp_slack}}}};
}

Certificate certificate_from_json(const Json& j) {
  std::string path = "$";
  const Json* c = &j;
  if (j.is_object() && j.contains("certificate")) {
    c = &j["certificate"];
    path = "$.certificate";
  }
  if (!c->is_object()) throw ParseError(path, "expected a certificate object");
  Certificate cert;
  const Json& cls = field(*c, path, "class");
  if (!cls.is_string()) throw ParseError(key(path, "class"), "expected a string");
  try {
    cert.cls = parse_system_class(cls.get<std::string>());
  } catch (const Error&) {
    throw ParseError(key(path, "class"), "unknown class");
  }
  cert.nu = vector_of(field(*c, path, "nu"), key(path, "nu"));
  const Json& mu = array(field(*c, path, "mu"), key(path, "mu"));
  for (std::size_t r = 0; r < mu.size(); ++r) {
    cert.mu.push_back(vector_of(mu[r], at(key(path, "mu"), r)));
    if (cert.mu.back().size() == 0) throw ParseError(at(key(path, "mu"), r), "empty vector");
  }
  if (cert.nu.size() == 0) throw ParseError(key(path, "nu"), "empty vector");
  if (cert.mu.empty()) throw ParseError(key(path, "mu"), "at least one vector required");
  cert.beta = number(field(*c, path, "beta"), key(path, "beta"));
  if (c->contains("derivation")) {
    const Json& d = (*c)["derivation"];
    const std::string dp = key(path, "derivation");
    if (!d.is_object()) throw ParseError(dp, "expected an object");
    if (d.contains("construction") && d["construction"].is_string())
      cert.derivation.construction = d["construction"].get<std::string>();
    if (d.contains("q")) cert.derivation.q = vector_of(d["q"], key(dp, "q"));
    if (d.contains("v")) cert.derivation.v = vector_of(d["v"], key(dp, "v"));
    if (d.contains("w"))
      for (std::size_t r = 0; r < array(d["w"], key(dp, "w")).size(); ++r)
        cert.derivation.w.push_back(vector_of(d["w"][r], at(key(dp, "w"), r)));
    if (d.contains("epsilon")) cert.derivation.epsilon = number(d["epsilon"], key(dp, "epsilon"));
    if (d.contains("halvings")) cert.derivation.halvings = integer(d["halvings"], key(dp, "halvings"));
    if (d.contains("lp_slack")) cert.derivation.lp_slack = number(d["lp_slack"], key(dp, "lp_slack"));
  }
  return cert;
}

Json violations_to_json(const std::vector<Violation>& vs) {
  Json out = Json::array();
  for (const auto& v : vs)
    out.push_back({{"matrix", v.matrix}, {"row", v.row}, {"col", v.col}, {"rule", v.rule}, {"message", v.message()}});
  return out;
}

Json feasibility_to_json(const FeasibilityResult& r) {
  Json j = {{"verdict", r.sat() ? "SAT" : "UNSAT"},
            {"slack", r.slack},
            {"lp_optimum", r.lp_optimum},
            {"iterations", r.iterations}};
  j["witness"] = r.witness ? to_json(*r.witness) : Json(nullptr);
  return j;
}

Json margins_to_json(const MarginReport& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries) entries.push_back({{"family", e.family}, {"worst", e.worst}, {"pass", e.pass}});
  return {{"pass", r.pass}, {"entries", entries}};
}

Json monitor_to_json(const MonitorReport& r) {
  Json violations = Json::array();
  for (const auto& v : r.violations)
    violations.push_back({{"step", v.step},
                          {"t", v.t},
                          {"v_before", v.v_before},
                          {"v_after", v.v_after},
                          {"margin", v.excess},
                          {"kind", v.kind}});
  Json j = {{"pass", r.pass},
            {"diverged", r.diverged},
            {"steps", r.v.empty() ? 0 : static_cast<long>(r.v.size()) - 1},
            {"worst", r.worst},
            {"violation_count", r.violation_count},
            {"rate_checked", r.rate_checked},
            {"rate_skipped", r.rate_skipped},
            {"violations", violations}};
  if (!r.v.empty()) {
    j["v_initial"] = r.v.front();
    j["v_final"] = r.v.back();
  }
  return j;
}

Json outcome_to_json(const ScenarioOutcome& o) {
  return {{"index", o.index},
          {"seed", o.seed},
          {"nonlinearity", o.nonlinearity},
          {"delays", o.delays},
          {"initial_norm", o.initial_norm},
          {"terminal_norm", o.terminal_norm},
          {"ratio", o.ratio},
          {"diverged", o.diverged}};
}

}  // namespace krasovskii
