#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "driver.hpp"
#include "support/temp_dir.hpp"

using namespace flakilab;
using flakilab::testing::slurp;
using flakilab::testing::TempDir;
namespace fs = std::filesystem;

namespace {

const fs::path kData = FLAKILAB_TEST_DATA_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "flakilab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = driver::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Driver, MissingInputExitsWithIoCode) {
  auto r = cli({"repair-analytic", "-i", "/no/such/scenario.json", "--seed", "1"});
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("/no/such/scenario.json"), std::string::npos);
}

TEST(Driver, ParseErrorsExitWithTwo) {
  TempDir dir;
  EXPECT_EQ(cli({"run", dir.write("bad.json", "{").string()}).code, 2);
  EXPECT_EQ(cli({"run", dir.write("kind.json", R"({"experiment": "nope"})").string()}).code, 2);
  auto csv = dir.write("bad.csv", "test,m0\nt0,3\n");
  EXPECT_EQ(cli({"mutation-sweep", "-i", csv.string(), "--seed", "1"}).code, 2);
  EXPECT_EQ(cli({"mutation-sweep", "--no-such-flag"}).code, 2);
  EXPECT_EQ(cli({}).code, 2);
}

TEST(Driver, InvariantViolationsExitWithThree) {
  auto csv = (kData / "two_mutants.csv").string();
  EXPECT_EQ(cli({"mutation-sweep", "-i", csv, "--seed", "1", "-p", "1.5"}).code, 3);
  EXPECT_EQ(cli({"mutation-sweep", "-i", csv, "--seed", "1", "--scope-group", "ghost"}).code, 3);
  EXPECT_EQ(cli({"mutation-sweep", "-i", csv, "--seed", "1", "--p-start", "0.6", "--p-end", "0.2"})
                .code,
            3);
}

TEST(Driver, ExitCodeMapping) {
  EXPECT_EQ(driver::exit_code(ErrorKind::Parse), 2);
  EXPECT_EQ(driver::exit_code(ErrorKind::Invariant), 3);
  EXPECT_EQ(driver::exit_code(ErrorKind::Io), 4);
}

TEST(Driver, NoPartialReportOnError) {
  TempDir dir;
  auto out = dir / "report.json";
  auto r = cli({"mutation-sweep", "-i", (kData / "two_mutants.csv").string(), "--seed", "1",
                "-p", "2", "--out", out.string()});
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_TRUE(fs::is_empty(dir.path()));
}

TEST(Driver, SameSeedSameBytes) {
  TempDir dir;
  for (int i = 0; i < 2; ++i) {
    auto r = cli({"run", (kData / "sweep.json").string(), "--out",
                  (dir / ("r" + std::to_string(i) + ".json")).string(), "--csv",
                  (dir / ("r" + std::to_string(i) + ".csv")).string(), "--replicates", "200"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(slurp(dir / "r0.json"), slurp(dir / "r1.json"));
  EXPECT_EQ(slurp(dir / "r0.csv"), slurp(dir / "r1.csv"));
}

TEST(Driver, JobsDoNotChangeBytes) {
  auto a = cli({"fl-robustness-sweep", "-i", (kData / "coverage_small.csv").string(), "--seed",
                "5", "--replicates", "50", "--jobs", "1"});
  auto b = cli({"fl-robustness-sweep", "-i", (kData / "coverage_small.csv").string(), "--seed",
                "5", "--replicates", "50", "--jobs", "3"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST(Driver, MutationSweepMatchesClosedForm) {
  auto r = cli({"run", (kData / "sweep.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto doc = nlohmann::json::parse(r.out);
  const auto& point = doc["results"][0];
  EXPECT_EQ(point["replicates"], 10000);
  const double mean = point["score"]["mean"];
  const double se = point["standard_error"];
  EXPECT_NEAR(mean, 0.75, 3.0 * se);
  EXPECT_EQ(doc["seed"], 42);
  EXPECT_EQ(doc["config"]["experiment"], "mutation-sweep");
  EXPECT_EQ(doc["tool_version"], std::string(kToolVersion));
}

TEST(Driver, OmittedSeedIsDrawnAndPrinted) {
  auto r = cli({"fl-localize", "-i", (kData / "coverage_small.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto doc = nlohmann::json::parse(r.out);
  const auto seed = doc["seed"].get<std::uint64_t>();
  EXPECT_NE(r.err.find("seed " + std::to_string(seed)), std::string::npos);
}

TEST(Driver, FlagsOverrideConfig) {
  auto r = cli({"run", (kData / "sweep.json").string(), "--seed", "7", "--replicates", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["seed"], 7);
  EXPECT_EQ(doc["results"][0]["replicates"], 10);
}

TEST(Driver, FlakeReportWritesXml) {
  TempDir dir;
  auto xml = dir / "flaked.xml";
  auto r = cli({"flake-report", "-i", (kData / "report.xml").string(), "-p", "1", "--seed", "1",
                "--xml", xml.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto report = parse_junit_xml(slurp(xml));
  std::size_t flaky = 0;
  for (const auto& tc : report.cases) flaky += tc.outcome == Outcome::FlakyFail;
  EXPECT_EQ(flaky, 3u);
  EXPECT_NE(slurp(xml).find(R"(name="nbFlaked" value="3")"), std::string::npos);
}

TEST(Driver, RepairAnalyticScenarioProbability) {
  auto r = cli({"repair-analytic", "-i", (kData / "chart24.json").string(), "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto doc = nlohmann::json::parse(r.out);
  EXPECT_NEAR(doc["summary"]["expected_valid"].get<double>(), 1.9, 1e-12);
  EXPECT_NEAR(doc["summary"]["p_at_least_one_valid"].get<double>(), 0.9975, 1e-12);
}

TEST(Driver, RepairSimComparison) {
  auto r = cli({"repair-sim", "-i", (kData / "fixture.json").string(), "--seed", "3", "-p",
                "0.05", "--compare", "--replicates", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["results"].size(), 4u);
  EXPECT_TRUE(doc["summary"].contains("wilcoxon"));
}

TEST(Driver, GridValues) {
  driver::Grid g;
  auto v = g.values();
  ASSERT_EQ(v.size(), 51u);
  EXPECT_DOUBLE_EQ(v[5], 0.05);
  EXPECT_DOUBLE_EQ(v.back(), 0.5);
}

TEST(Driver, ConfigParsing) {
  auto doc = nlohmann::json::parse(R"({
    "experiment": "fl-robustness-sweep",
    "inputs": {"coverage_matrix": "m.csv"},
    "flakiness": {"p": 0.1, "direction": "both", "scope": {"groups": ["a.B"]}},
    "sweep": {"p_start": 0, "p_end": 0.2, "p_step": 0.05},
    "replicates": 5, "seed": 3, "params": {"threshold": 0.2}
  })");
  auto c = driver::parse_config(doc, "/base");
  EXPECT_EQ(c.kind, driver::ExperimentKind::FlRobustnessSweep);
  EXPECT_EQ(c.inputs.at("coverage_matrix"), fs::path("/base/m.csv"));
  EXPECT_EQ(c.flakiness.direction, Direction::Both);
  EXPECT_EQ(c.flakiness.scope, Scope::groups({"a.B"}));
  EXPECT_EQ(c.sweep->values().size(), 5u);
  EXPECT_EQ(*c.replicates, 5u);
  auto echo = driver::config_to_json(c);
  EXPECT_EQ(echo["params"]["threshold"], 0.2);
  EXPECT_THROW(driver::parse_config(nlohmann::json::parse(R"({"experiment": 3})")), ParseError);
  EXPECT_THROW(driver::parse_config(nlohmann::json::parse(
                   R"({"experiment": "fl-localize", "flakiness": {"scope": 4}})")),
               ParseError);
}
