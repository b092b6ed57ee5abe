#pragma once

// Experiment driver: binds a JSON configuration to one of the library
// pipelines and produces provenance-stamped outputs.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flakilab/domain.hpp"
#include "flakilab/error.hpp"
#include "flakilab/report_io.hpp"

namespace flakilab::driver {

enum class ExperimentKind {
  MutationSweep,
  SampledSuites,
  RepairAnalytic,
  RepairSim,
  FlLocalize,
  FlRobustnessSweep,
  FlakeReport,
};

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(std::string_view name);
const std::vector<std::string>& experiment_names();

struct Grid {
  double start = 0.0;
  double end = 0.5;
  double step = 0.01;

  /// start, start + step, ... up to end, rounded to 12 decimals so that
  /// accumulated steps land on the intended values.
  std::vector<double> values() const;
};

struct Outputs {
  std::optional<std::filesystem::path> json;
  std::optional<std::filesystem::path> csv;
  std::optional<std::filesystem::path> xml;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::MutationSweep;
  /// Input role (kill_matrix, coverage_matrix, scenario, fixture, junit) to path.
  std::map<std::string, std::filesystem::path> inputs;
  FlakinessModel flakiness;
  /// True when the configuration set `flakiness.p` explicitly.
  bool probability_given = false;
  std::optional<Grid> sweep;
  std::optional<std::size_t> replicates;
  std::optional<std::uint64_t> seed;
  Outputs outputs;
  unsigned jobs = 1;
  /// Experiment-specific knobs (threshold, budget, suites, ...).
  nlohmann::json params = nlohmann::json::object();
};

/// Relative paths are resolved against `base_dir`. Throws ParseError.
ExperimentConfig parse_config(const nlohmann::json& doc,
                              const std::filesystem::path& base_dir = {});

/// Canonical JSON form of a configuration, echoed into reports.
nlohmann::json config_to_json(const ExperimentConfig& config);

struct RunOutput {
  ExperimentReport report;
  std::vector<Measurement> measurements;
  /// Perturbed JUnit report for flake-report.
  std::optional<std::string> xml;
};

/// Runs the experiment. The seed must already be set.
RunOutput execute(const ExperimentConfig& config);

/// Executes and writes every requested output. Nothing is written unless
/// the experiment and all serializations succeed. The JSON report goes to
/// `stdout_sink` when no JSON path is configured.
void run(const ExperimentConfig& config, std::ostream& stdout_sink);

/// Exit status for an error category: parse 2, invariant 3, I/O 4.
int exit_code(ErrorKind kind);

/// Full command-line entry point.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace flakilab::driver
