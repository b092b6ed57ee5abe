#pragma once

// Readers and writers for the artifacts flakilab exchanges with the outside
// world: JUnit XML reports, matrix CSV files, experiment reports (JSON) and
// long-form measurement tables (CSV).
//
// Parsers never trust their input: anything malformed surfaces as ParseError
// (or InvariantError when the text is well-formed but describes an invalid
// matrix). Emitters write UTF-8 with LF line endings.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "flakilab/domain.hpp"
#include "flakilab/rng.hpp"

namespace flakilab {

/// Failure-type label carried by injected flaky failures.
inline constexpr std::string_view kFlakyExceptionType = "FlakiException";

struct TestCaseRecord {
  std::string name;
  /// JUnit `classname`.
  std::string group;
  Outcome outcome = Outcome::Pass;
  double duration = 0.0;
  /// For Fail: which child element reported it ("failure" or "error").
  std::string failure_tag;
  std::string failure_type;
  std::string failure_message;

  bool operator==(const TestCaseRecord&) const = default;
};

struct TestReport {
  std::string suite_name;
  std::vector<TestCaseRecord> cases;

  bool operator==(const TestReport&) const = default;
};

std::optional<std::string> find_violation(const TestReport& r);

/// Reads a `testsuite` document, or a `testsuites` document whose suites are
/// concatenated in order. A `failure` or `error` child marks Fail, or
/// FlakyFail when its type is FlakiException; a `flakyFailure` child marks
/// FlakyPass. Skipped testcases are rejected.
TestReport parse_junit_xml(std::string_view xml);

/// Writes a single `testsuite`. When `counters` is given they are emitted as
/// suite-level properties nbTests, nbPassed, nbFlaked (and nbRealFailed).
std::string emit_junit_xml(const TestReport& report,
                           const std::optional<FlakeCounters>& counters = std::nullopt);

struct FlakedReport {
  TestReport report;
  FlakeCounters counters;
};

/// Applies `model` to the report outcomes; groups are the testcase classnames
/// and test labels are the testcase names.
FlakedReport perturb_report(const TestReport& report, const FlakinessModel& model,
                            RngStream& rng);

std::string emit_flaked_report(const TestReport& report, const FlakinessModel& model,
                               RngStream& rng);

enum class MatrixKind { Coverage, Kill };

/// Header: a corner cell, then one label per statement (coverage) or mutant
/// (kill), optionally followed by a `baseline` column. Each row: the test
/// label, the cells, and the baseline outcome (`pass` or `fail`) if the
/// column is present; without it every test passes. Coverage cells are 0/1;
/// kill cells are 0 (not covered), 1 (covered, survived), 2 (covered, killed).
std::variant<CoverageMatrix, KillMatrix> parse_matrix_csv(std::string_view csv,
                                                          MatrixKind kind);
CoverageMatrix parse_coverage_csv(std::string_view csv);
KillMatrix parse_kill_csv(std::string_view csv);

/// Always writes the baseline column.
std::string emit_matrix_csv(const CoverageMatrix& m);
std::string emit_matrix_csv(const KillMatrix& m);

inline constexpr std::string_view kToolName = "flakilab";
inline constexpr std::string_view kToolVersion = FLAKILAB_VERSION_STRING;

/// Provenance-stamped experiment output. `results` is an array with one
/// element per replicate, grid point or run; `summary` holds aggregates.
struct ExperimentReport {
  std::string experiment;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::string tool_version = std::string(kToolVersion);
  nlohmann::json results = nlohmann::json::array();
  nlohmann::json summary = nlohmann::json::object();

  bool operator==(const ExperimentReport&) const = default;
};

/// Keys are emitted in sorted order; doubles round-trip exactly.
std::string emit_report_json(const ExperimentReport& report);
ExperimentReport parse_report_json(std::string_view text);

/// One row of the long-form table. A missing value is written as `NA`.
struct Measurement {
  std::string experiment;
  double p = 0.0;
  std::size_t replicate = 0;
  std::string metric;
  std::optional<double> value;

  bool operator==(const Measurement&) const = default;
};

/// Columns: experiment,p,replicate,metric,value.
std::string emit_long_csv(const std::vector<Measurement>& rows);
std::vector<Measurement> parse_long_csv(std::string_view csv);

/// Repair scenario file: {"patches": [{"id", "covering_tests" or
/// "covering_test_ids", "valid", "genuine"}], "p": optional}.
struct ScenarioFile {
  RepairScenario scenario;
  std::optional<double> p;

  bool operator==(const ScenarioFile&) const = default;
};

ScenarioFile parse_scenario_json(std::string_view text);
std::string emit_scenario_json(const ScenarioFile& file);

/// Shortest decimal text that reads back as the same double.
std::string format_double(double v);

}  // namespace flakilab
