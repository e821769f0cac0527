#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "krasovskii/commands.h"
#include "test_util.h"

using namespace krasovskii;
using namespace krasovskii::testing;

namespace {

std::string data(const std::string& name) { return std::string(KRASOVSKII_DATA_DIR) + "/" + name; }

std::string temp_file(const std::string& name, const std::string& content) {
  const std::string path = ::testing::TempDir() + name;
  std::ofstream(path) << content;
  return path;
}

std::string error_path(const std::string& doc) {
  try {
    system_from_json(Json::parse(doc));
  } catch (const ParseError& e) {
    return e.path();
  }
  return "<no error>";
}

}  // namespace

TEST(SystemJson, RoundTripsEverySample) {
  for (const auto& entry : std::filesystem::directory_iterator(KRASOVSKII_DATA_DIR)) {
    const Json j = read_json_file(entry.path().string());
    EXPECT_EQ(system_to_json(system_from_json(j)), j) << entry.path();
  }
}

TEST(SystemJson, ErrorsNameTheOffendingPath) {
  const std::string base = R"({"class":"switched_delay","n":2,"N":1,"A":[[[-1,0],[0,-1]]],)";
  EXPECT_EQ(error_path(base + R"("B":[[[[0,0],[0,0]]]],"delays":[-1]})"), "$.delays[0]");
  EXPECT_EQ(error_path(base + R"("B":[[[[0,0],[0,"x"]]]],"delays":[1]})"), "$.B[0][0][1][1]");
  EXPECT_EQ(error_path(base + R"("B":[[[[0,0],[0]]]],"delays":[1]})"), "$.B[0][0][1]");
  EXPECT_EQ(error_path(base + R"("B":[[[[0,0],[0,0]]]],"delays":[1,2]})"), "$.delays");
  EXPECT_EQ(error_path(base + R"("B":[[[[0,0],[0,0]]]],"delays":[1],"extra":1})"), "$.extra");
  EXPECT_EQ(error_path(base + R"("B":[[[[0,0],[0,0]]]]})"), "$.delays");
  EXPECT_EQ(error_path(R"({"class":"hybrid","n":1,"A":[[[-1]]]})"), "$.class");
  EXPECT_EQ(error_path(R"({"class":"coupled","n":1,"N":2,"A":[[[-1]]]})"), "$.A");
  EXPECT_EQ(error_path(R"({"class":"coupled","n":1,"A":[[[-1]]],"B":[[[1]]],"C":[[[1]]],"D":[[[0]]],"delay":1})"),
            "$.m");
  EXPECT_EQ(error_path(R"({"class":"discrete","n":1,"A":[[[0.1]]],"B":[[[[0.1]]]],"delays":[1.5]})"),
            "$.delays[0]");
  EXPECT_EQ(error_path("[1,2]"), "$");
}

TEST(SystemJson, HashIsBoundToValues) {
  const auto sys = system_from_json(read_json_file(data("example1.json")));
  const std::string h = input_hash(sys);
  EXPECT_EQ(h.size(), 64u);
  EXPECT_EQ(h, input_hash(system_from_json(system_to_json(sys))));
  auto other = sys;
  std::get<SwitchedDelaySystem>(other.system).delays[0] = 1.0000000000000002;
  EXPECT_NE(h, input_hash(other));
}

TEST(CertificateJson, RoundTripsAtFullPrecision) {
  const auto sys = system_from_json(read_json_file(data("switched_coupled.json")));
  const Certificate cert = certify(sys);
  const Json j = Json::parse(certificate_to_json(cert).dump());
  const Certificate back = certificate_from_json(j);
  EXPECT_EQ(back.cls, cert.cls);
  EXPECT_EQ(back.nu, cert.nu);
  ASSERT_EQ(back.mu.size(), cert.mu.size());
  EXPECT_EQ(back.mu[0], cert.mu[0]);
  EXPECT_EQ(back.beta, cert.beta);
  EXPECT_EQ(back.derivation.epsilon, cert.derivation.epsilon);
  EXPECT_EQ(back.derivation.construction, cert.derivation.construction);
  EXPECT_EQ(Json::parse(Json(0.1 + 0.2).dump()).get<double>(), 0.1 + 0.2);
}

TEST(Check, Examples) {
  const auto one = cmd_check(data("example1.json"));
  EXPECT_EQ(one.exit_code, kExitOk);
  EXPECT_EQ(one.report["feasibility"]["verdict"], "SAT");
  EXPECT_EQ(one.report["feasibility"]["witness"].size(), 2u);

  const auto two = cmd_check(data("example2.json"));
  EXPECT_EQ(two.exit_code, kExitNoCertificate);
  EXPECT_EQ(two.report["feasibility"]["verdict"], "UNSAT");

  const auto bad = cmd_check(data("invalid_negative_b.json"));
  EXPECT_EQ(bad.exit_code, kExitInvalid);
  ASSERT_EQ(bad.report["validation"]["violations"].size(), 1u);
  EXPECT_EQ(bad.report["validation"]["violations"][0]["row"], 1);
  EXPECT_EQ(bad.report["validation"]["violations"][0]["col"], 2);
}

TEST(Check, MalformedInputNeverThrows) {
  for (const std::string doc : {"", "{", "null", "[]", R"({"class":1})", R"({"class":"neutral","n":-1})",
                                R"({"class":"neutral","n":1,"A":[[[1]]],"G":[[[1]]],"D":[[1]],"delay":"x"})"}) {
    const auto res = cmd_check(temp_file("malformed.json", doc));
    EXPECT_EQ(res.exit_code, kExitUsage) << doc;
    EXPECT_EQ(res.report["status"], "error");
  }
  EXPECT_EQ(cmd_check("/nonexistent/file.json").exit_code, kExitUsage);
}

TEST(Certify, Examples) {
  const auto one = cmd_certify(data("example1.json"));
  ASSERT_EQ(one.exit_code, kExitOk);
  for (const auto& e : one.report["margins"]["entries"]) EXPECT_LT(e["worst"].get<double>(), 0.0);
  EXPECT_EQ(one.report["input"]["sha256"].get<std::string>().size(), 64u);

  const auto critical = cmd_certify(data("coupled_critical.json"));
  EXPECT_EQ(critical.exit_code, kExitNoCertificate);
  EXPECT_EQ(critical.report["failure"]["reason"], "composite not Hurwitz");

  const auto disc = cmd_certify(data("discrete.json"));
  ASSERT_EQ(disc.exit_code, kExitOk);
  EXPECT_NEAR(disc.report["certificate"]["mu"][0][0].get<double>(), 0.55, 1e-12);
}

TEST(Simulate, CertificateMonitorPasses) {
  const auto cert = cmd_certify(data("example1.json"));
  const std::string cert_path = temp_file("example1_cert.json", cert.report.dump());
  SimulateFlags flags;
  flags.cert_path = cert_path;
  flags.signal = "0:1,0.7:2,1.9:1,3:2";
  flags.trace_path = ::testing::TempDir() + "example1.csv";
  const auto res = cmd_simulate(data("example1.json"), flags);
  ASSERT_EQ(res.exit_code, kExitOk) << res.report.dump(2);
  EXPECT_TRUE(res.report["monitor"]["pass"].get<bool>());
  EXPECT_TRUE(res.report["margins"]["pass"].get<bool>());
  EXPECT_FALSE(res.report.contains("warnings"));
  std::ifstream csv(*flags.trace_path);
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "t,mode,x_1,x_2");

  EXPECT_EQ(cmd_simulate(data("example1.json"), flags).report, res.report);
}

TEST(Simulate, ProbeGrowthAndForgedCertificate) {
  const auto plain = cmd_simulate(data("coupled_probe.json"), {});
  ASSERT_EQ(plain.exit_code, kExitOk);
  EXPECT_TRUE(plain.report["trajectory"]["growth"].get<bool>());
  EXPECT_GT(plain.report["trajectory"]["ratio"].get<double>(), 10.0);

  const Json forged = {{"class", "coupled"}, {"nu", {1.0}}, {"mu", {{1.0}}}, {"beta", 0.1}};
  SimulateFlags flags;
  flags.cert_path = temp_file("forged.json", forged.dump());
  const auto res = cmd_simulate(data("coupled_probe.json"), flags);
  EXPECT_EQ(res.exit_code, kExitMonitorFailed);
  EXPECT_FALSE(res.report["margins"]["pass"].get<bool>());
  EXPECT_GT(res.report["monitor"]["violation_count"].get<long>(), 0);
  const auto& v = res.report["monitor"]["violations"][0];
  for (const char* k : {"step", "t", "v_before", "v_after", "margin"}) EXPECT_TRUE(v.contains(k)) << k;

  const Json wrong = {{"class", "neutral"}, {"nu", {1.0}}, {"mu", {{1.0}}}, {"beta", 0.1}};
  flags.cert_path = temp_file("wrong.json", wrong.dump());
  EXPECT_EQ(cmd_simulate(data("coupled_probe.json"), flags).exit_code, kExitUsage);
}

TEST(Simulate, ZeroDelayIdentityOnEveryClass) {
  SimulateFlags flags;
  flags.tau = 0.0;
  flags.horizon = 5.0;
  for (const char* f : {"example1.json", "coupled_certified.json", "switched_coupled.json", "neutral.json",
                        "discrete.json"}) {
    const auto res = cmd_simulate(data(f), flags);
    EXPECT_EQ(res.exit_code, kExitOk) << f << res.message;
    EXPECT_FALSE(res.report["trajectory"]["diverged"].get<bool>()) << f;
  }
}

TEST(Simulate, BadFlags) {
  SimulateFlags flags;
  flags.signal = "periodic:0";
  EXPECT_EQ(cmd_simulate(data("example1.json"), flags).exit_code, kExitUsage);
  flags = {};
  flags.nonlinearity = "tanh:2";
  EXPECT_EQ(cmd_simulate(data("discrete.json"), flags).exit_code, kExitUsage);
  flags = {};
  flags.tau = 0.5;
  EXPECT_EQ(cmd_simulate(data("discrete.json"), flags).exit_code, kExitUsage);
  flags = {};
  flags.step = -1;
  EXPECT_EQ(cmd_simulate(data("example1.json"), flags).exit_code, kExitUsage);
}

TEST(Signal, Syntax) {
  EXPECT_EQ(parse_signal("constant:2", 2, 10, 0).modes(), std::vector<int>{1});
  EXPECT_EQ(parse_signal("0:1,1.5:2", 2, 10, 0).breakpoints(), (std::vector<double>{0, 1.5}));
  const auto periodic = parse_signal("periodic:1", 3, 10, 0);
  EXPECT_EQ(periodic.mode_at(0.5), 0);
  EXPECT_EQ(periodic.mode_at(1.5), 1);
  EXPECT_EQ(parse_signal("random:0.5:1", 2, 10, 4).breakpoints(), parse_signal("random:0.5:1", 2, 10, 4).breakpoints());
  EXPECT_THROW(parse_signal("random:1", 2, 10, 0), Error);
  EXPECT_THROW(parse_signal("0:1,x:2", 2, 10, 0), Error);
}

TEST(Falsify, Samples) {
  FalsifyFlags flags;
  flags.budget = 10;
  const auto stable = cmd_falsify(data("stable.json"), flags);
  EXPECT_EQ(stable.exit_code, kExitOk);
  EXPECT_EQ(stable.report["result"], "none found");

  const auto probe = cmd_falsify(data("coupled_probe.json"), flags);
  EXPECT_EQ(probe.exit_code, kExitOk);
  EXPECT_EQ(probe.report["result"], "growth evidence");
  EXPECT_GE(probe.report["evidence"]["ratio"].get<double>(), 10.0);

  flags.budget = 100;
  flags.horizon = 10.0;
  const auto two = cmd_falsify(data("example2.json"), flags);
  EXPECT_EQ(two.exit_code, kExitOk);
  EXPECT_EQ(two.report["scenarios"].size(), 100u);
  EXPECT_FALSE(two.report.contains("stable"));
}
