#include "driver.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "flakilab/error.hpp"
#include "flakilab/fl_lab.hpp"
#include "flakilab/flakiness.hpp"
#include "flakilab/mutation_lab.hpp"
#include "flakilab/repair_analytic.hpp"
#include "flakilab/repair_sim.hpp"

namespace flakilab::driver {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct KindInfo {
  ExperimentKind kind;
  std::string_view name;
  std::size_t default_replicates;
  std::string_view primary_input;
  std::string_view help;
};

constexpr KindInfo kKinds[] = {
    {ExperimentKind::MutationSweep, "mutation-sweep", 100, "kill_matrix",
     "Mutation score under flakiness across a probability grid"},
    {ExperimentKind::SampledSuites, "sampled-suites", 100, "kill_matrix",
     "Score inflation on randomly sampled sub-suites"},
    {ExperimentKind::RepairAnalytic, "repair-analytic", 10000, "scenario",
     "Closed-form patch survival with a Monte-Carlo check"},
    {ExperimentKind::RepairSim, "repair-sim", 10, "fixture",
     "Repair campaigns on a generated program, optionally targeted"},
    {ExperimentKind::FlLocalize, "fl-localize", 1, "coverage_matrix",
     "Ochiai ranking of a coverage matrix"},
    {ExperimentKind::FlRobustnessSweep, "fl-robustness-sweep", 100, "coverage_matrix",
     "Ranking stability of Ochiai across a probability grid"},
    {ExperimentKind::FlakeReport, "flake-report", 1, "junit",
     "Inject flaky outcomes into a JUnit report"},
};

const KindInfo& info(ExperimentKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k;
  }
  return kKinds[0];
}

json optional_to_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

json metric_summary_json(const MetricSummary& s) {
  return {{"present", s.present}, {"missing", s.missing}, {"mean", optional_to_json(s.mean)},
          {"median", optional_to_json(s.median)}};
}

json summary_json(const Summary& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}};
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read input file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
  return buf.str();
}

const fs::path& require_input(const ExperimentConfig& config, std::string_view role) {
  auto it = config.inputs.find(std::string(role));
  if (it == config.inputs.end()) {
    throw ParseError(std::string(info(config.kind).name) + " needs an input '" +
                     std::string(role) + "'");
  }
  return it->second;
}

template <typename T>
T param(const ExperimentConfig& config, const char* key, T fallback) {
  auto it = config.params.find(key);
  if (it == config.params.end()) return fallback;
  try {
    return it->template get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("parameter '") + key + "' has the wrong type");
  }
}

std::size_t count_param(const ExperimentConfig& config, const char* key, std::size_t fallback) {
  auto it = config.params.find(key);
  if (it == config.params.end()) return fallback;
  if (!it->is_number_unsigned()) {
    throw ParseError(std::string("parameter '") + key + "' must be a non-negative integer");
  }
  return it->get<std::size_t>();
}

OchiaiMode ochiai_mode(const ExperimentConfig& config) {
  const auto mode = param<std::string>(config, "ochiai", "standard");
  if (mode == "standard") return OchiaiMode::Standard;
  if (mode == "total-failing") return OchiaiMode::TotalFailing;
  throw ParseError("parameter 'ochiai' must be 'standard' or 'total-failing'");
}

double probability(const ExperimentConfig& config, double fallback) {
  return config.probability_given ? config.flakiness.probability : fallback;
}

std::vector<double> grid_values(const ExperimentConfig& config) {
  return config.sweep.value_or(Grid{}).values();
}

json campaign_json(const CampaignResult& r) {
  return {{"valid_patch_count", r.valid_patch_count},
          {"failing_test_count", r.failing_test_count},
          {"positive_test_count", r.positive_test_count},
          {"executed_test_count", r.executed_test_count},
          {"generations_used", r.generations_used},
          {"evaluated_candidates", r.evaluated_candidates},
          {"ingredient_count", r.ingredient_count},
          {"validation_flake_probability", r.validation_flake_probability}};
}

void campaign_rows(std::vector<Measurement>& rows, const std::string& experiment, double p,
                   std::size_t run, const std::string& prefix, const CampaignResult& r) {
  auto add = [&](const char* metric, std::size_t v) {
    rows.push_back({experiment, p, run, prefix + metric, static_cast<double>(v)});
  };
  add("valid_patch_count", r.valid_patch_count);
  add("failing_test_count", r.failing_test_count);
  add("positive_test_count", r.positive_test_count);
  add("executed_test_count", r.executed_test_count);
}

// ------------------------------------------------------------ experiments

void mutation_sweep(const ExperimentConfig& config, RunOutput& out) {
  const KillMatrix m = parse_kill_csv(read_file(require_input(config, "kill_matrix")));
  const auto grid = grid_values(config);
  SweepOptions options{*config.replicates, *config.seed, config.jobs};
  const auto points = score_sweep(m, grid, config.flakiness, options);
  const std::string name(info(config.kind).name);
  for (const auto& point : points) {
    FlakinessModel at = config.flakiness;
    at.probability = point.p;
    at.per_test.clear();
    const auto expected = expected_flaky_score(m, at);
    out.report.results.push_back({{"p", point.p},
                                  {"replicates", point.scores.size()},
                                  {"score", summary_json(point.summary)},
                                  {"standard_error", point.summary.std /
                                                         std::sqrt(static_cast<double>(std::max<std::size_t>(1, point.scores.size())))},
                                  {"expected", {{"mean", expected.mean}, {"std", expected.std}}},
                                  {"scores", point.scores}});
    for (std::size_t r = 0; r < point.scores.size(); ++r) {
      out.measurements.push_back({name, point.p, r, "score", point.scores[r]});
    }
  }
  out.report.summary = {{"tests", m.n_tests()},
                        {"mutants", m.n_mutants()},
                        {"killed", m.killed_count()},
                        {"mutation_score", mutation_score(m)},
                        {"saturation_score", saturation_score(m, config.flakiness)}};
}

void sampled_suites(const ExperimentConfig& config, RunOutput& out) {
  const KillMatrix m = parse_kill_csv(read_file(require_input(config, "kill_matrix")));
  SampledSuitesOptions options;
  options.suites = count_param(config, "suites", 100);
  auto range = param<std::vector<double>>(config, "size_range", {0.10, 0.90});
  if (range.size() != 2) throw ParseError("parameter 'size_range' must hold two fractions");
  options.min_fraction = range[0];
  options.max_fraction = range[1];
  options.p = probability(config, 0.05);
  options.replicates = *config.replicates;
  options.seed = *config.seed;
  options.jobs = config.jobs;
  const auto result = sampled_suite_differences(m, config.flakiness, options);
  const std::string name(info(config.kind).name);
  for (std::size_t i = 0; i < result.suites.size(); ++i) {
    const auto& suite = result.suites[i];
    out.report.results.push_back({{"suite", i},
                                  {"size", suite.tests.size()},
                                  {"baseline_score", suite.baseline_score},
                                  {"mean_difference", suite.mean_difference},
                                  {"differences", suite.differences}});
    out.measurements.push_back({name, options.p, i, "baseline_score", suite.baseline_score});
    out.measurements.push_back({name, options.p, i, "mean_difference", suite.mean_difference});
  }
  out.report.summary = {{"p", options.p},
                        {"suites", options.suites},
                        {"mutation_score", mutation_score(m)},
                        {"difference_quartiles",
                         {{"q1", result.quartiles.q1},
                          {"median", result.quartiles.median},
                          {"q3", result.quartiles.q3}}}};
}

void repair_analytic(const ExperimentConfig& config, RunOutput& out) {
  const ScenarioFile file = parse_scenario_json(read_file(require_input(config, "scenario")));
  const double p = config.probability_given ? config.flakiness.probability : file.p.value_or(0.05);
  const auto report = analyze_repair(file.scenario, p);
  const std::string name(info(config.kind).name);
  for (const auto& patch : report.valid_patches) {
    out.report.results.push_back({{"id", patch.id},
                                  {"covering_tests", patch.covering_tests},
                                  {"invalidation_probability", patch.invalidation},
                                  {"survival_probability", 1.0 - patch.invalidation}});
  }
  const auto valid = file.scenario.valid();
  const auto mc = monte_carlo_repair(valid, p, *config.replicates, *config.seed, config.jobs);
  json summary = {{"p", p},
                  {"valid_patches", report.valid_count},
                  {"genuine_patches", report.genuine_count},
                  {"covering_per_patch", report.covering_per_patch},
                  {"expected_valid", report.expected_valid},
                  {"expected_genuine", report.expected_genuine},
                  {"p_at_least_one_valid", report.p_at_least_one_valid},
                  {"p_at_least_one_genuine", report.p_at_least_one_genuine},
                  {"monte_carlo",
                   {{"replicates", mc.replicates},
                    {"mean_surviving", mc.mean_surviving},
                    {"standard_error", mc.standard_error},
                    {"p_at_least_one", mc.p_at_least_one},
                    {"histogram", mc.histogram}}}};
  if (report.valid_count > 0 && report.genuine_count > 0) {
    const auto g = genuine_advantage(file.scenario, p);
    summary["genuine_advantage"] = {{"p_genuine", g.p_genuine},
                                    {"mean_valid_survival", g.mean_valid_survival},
                                    {"ratio", optional_to_json(g.ratio)},
                                    {"relative_difference", optional_to_json(g.relative_difference)}};
  }
  out.report.summary = std::move(summary);
  for (const auto& [metric, value] :
       std::initializer_list<std::pair<const char*, double>>{
           {"expected_valid", report.expected_valid},
           {"expected_genuine", report.expected_genuine},
           {"p_at_least_one_valid", report.p_at_least_one_valid},
           {"p_at_least_one_genuine", report.p_at_least_one_genuine},
           {"mc_mean_surviving", mc.mean_surviving},
           {"mc_p_at_least_one", mc.p_at_least_one}}) {
    out.measurements.push_back({name, p, 0, metric, value});
  }
}

FixtureParams fixture_params(const json& j) {
  FixtureParams params;
  try {
    params.tests = j.value("tests", params.tests);
    params.statements = j.value("statements", params.statements);
    params.coverage_density = j.value("coverage_density", params.coverage_density);
    params.buggy_statements = j.value("buggy_statements", params.buggy_statements);
    params.covering_tests_per_buggy = j.value("covering_tests_per_buggy", params.covering_tests_per_buggy);
    params.failing_tests = j.value("failing_tests", params.failing_tests);
    params.groups = j.value("groups", params.groups);
    params.fix_probability = j.value("fix_probability", params.fix_probability);
  } catch (const json::exception&) {
    throw ParseError("fixture generator parameters have the wrong type");
  }
  return params;
}

SyntheticProgram load_program(const ExperimentConfig& config) {
  if (auto it = config.params.find("generator"); it != config.params.end()) {
    if (!it->is_object()) throw ParseError("parameter 'generator' must be an object");
    return generate_fixture(fixture_params(*it), param<std::uint64_t>(config, "generator_seed", 1));
  }
  const fs::path& path = require_input(config, "fixture");
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError("malformed fixture JSON '" + path.string() + "': " + e.what());
  }
  if (!doc.is_object()) throw ParseError("fixture must be a JSON object");
  if (auto gen = doc.find("generator"); gen != doc.end()) {
    const std::uint64_t seed = doc.value("seed", std::uint64_t{1});
    return generate_fixture(fixture_params(*gen), seed);
  }
  if (!doc.contains("coverage_matrix") || !doc["coverage_matrix"].is_string()) {
    throw ParseError("fixture needs 'coverage_matrix' (a CSV path) or 'generator'");
  }
  fs::path csv = doc["coverage_matrix"].get<std::string>();
  if (csv.is_relative()) csv = path.parent_path() / csv;
  SyntheticProgram program;
  program.coverage = parse_coverage_csv(read_file(csv));
  if (!doc.contains("buggy_statements") || !doc["buggy_statements"].is_array()) {
    throw ParseError("fixture needs a 'buggy_statements' array of statement labels");
  }
  for (const auto& label : doc["buggy_statements"]) {
    if (!label.is_string()) throw ParseError("buggy statement labels must be strings");
    const auto& statements = program.coverage.statements;
    auto it = std::find(statements.begin(), statements.end(), label.get<std::string>());
    if (it == statements.end()) {
      throw InvariantError("buggy statement '" + label.get<std::string>() + "' is not in the matrix");
    }
    program.buggy_statements.push_back(static_cast<std::size_t>(it - statements.begin()));
  }
  if (auto q = doc.find("fix_probability"); q != doc.end()) {
    if (!q->is_number()) throw ParseError("fix_probability must be a number");
    program.fix_probability = q->get<double>();
  }
  if (auto violation = find_violation(program)) throw InvariantError(*violation);
  return program;
}

void repair_sim(const ExperimentConfig& config, RunOutput& out) {
  const SyntheticProgram program = load_program(config);
  CampaignConfig campaign;
  campaign.budget = count_param(config, "budget", campaign.budget);
  campaign.population = count_param(config, "population", campaign.population);
  campaign.threshold = param<double>(config, "threshold", kDefaultThreshold);
  campaign.targeted = param<bool>(config, "targeted", false);
  campaign.mode = ochiai_mode(config);
  const bool compare = param<bool>(config, "compare", false);
  const std::size_t runs = *config.replicates;
  const double p = config.flakiness.probability;
  const std::string name(info(config.kind).name);

  if (compare) {
    const auto cmp = compare_targeted(program, config.flakiness, campaign, runs, *config.seed, config.jobs);
    for (std::size_t i = 0; i < runs; ++i) {
      out.report.results.push_back({{"run", i},
                                    {"targeted", campaign_json(cmp.targeted[i])},
                                    {"non_targeted", campaign_json(cmp.non_targeted[i])}});
      campaign_rows(out.measurements, name, p, i, "targeted.", cmp.targeted[i]);
      campaign_rows(out.measurements, name, p, i, "non_targeted.", cmp.non_targeted[i]);
    }
    out.report.summary = {{"runs", runs},
                          {"targeted_median_valid", cmp.targeted_median},
                          {"non_targeted_median_valid", cmp.non_targeted_median},
                          {"wilcoxon",
                           {{"n_nonzero", cmp.test.n_nonzero},
                            {"w_plus", cmp.test.w_plus},
                            {"w_minus", cmp.test.w_minus},
                            {"p_value", cmp.test.p_value},
                            {"exact", cmp.test.exact},
                            {"degenerate", cmp.test.degenerate}}}};
    return;
  }

  std::vector<CampaignResult> results(runs);
  for (std::size_t i = 0; i < runs; ++i) {
    results[i] = run_campaign(program, config.flakiness, campaign, RngStream(*config.seed, i));
  }
  std::vector<double> valid;
  for (std::size_t i = 0; i < runs; ++i) {
    json entry = campaign_json(results[i]);
    entry["run"] = i;
    out.report.results.push_back(std::move(entry));
    campaign_rows(out.measurements, name, p, i, "", results[i]);
    valid.push_back(static_cast<double>(results[i].valid_patch_count));
  }
  out.report.summary = {{"runs", runs},
                        {"targeted", campaign.targeted},
                        {"median_valid", optional_to_json(median(valid))}};
}

void fl_localize(const ExperimentConfig& config, RunOutput& out) {
  const CoverageMatrix m = parse_coverage_csv(read_file(require_input(config, "coverage_matrix")));
  const double threshold = param<double>(config, "threshold", kDefaultThreshold);
  const OchiaiMode mode = ochiai_mode(config);
  std::vector<Outcome> outcomes = m.baseline;
  FlakeCounters counters = count_outcomes(outcomes);
  if (config.flakiness.probability > 0.0 || !config.flakiness.per_test.empty()) {
    RngStream rng(*config.seed, 0);
    auto run = perturb_fl_run(m, config.flakiness, rng);
    outcomes = std::move(run.outcomes);
    counters = run.counters;
  }
  const auto report = localize(m, outcomes, threshold, mode);
  for (std::size_t s = 0; s < m.n_statements(); ++s) {
    out.report.results.push_back({{"statement", m.statements[s]},
                                  {"score", optional_to_json(report.statements[s].score)},
                                  {"selected", report.statements[s].selected}});
  }
  std::vector<std::string> flaked;
  for (std::size_t t = 0; t < m.n_tests(); ++t) {
    if (outcomes[t] == Outcome::FlakyFail || outcomes[t] == Outcome::FlakyPass) flaked.push_back(m.tests[t]);
  }
  out.report.summary = {{"threshold", threshold},
                        {"failing_tests", report.failing_tests},
                        {"selected", report.selected_count()},
                        {"flaked_tests", flaked},
                        {"counters",
                         {{"nbTests", counters.nbTests},
                          {"nbPassed", counters.nbPassed},
                          {"nbFlaked", counters.nbFlaked},
                          {"nbRealFailed", counters.nbRealFailed}}}};
  const std::string name(info(config.kind).name);
  const double p = config.flakiness.probability;
  out.measurements.push_back({name, p, 0, "selected_count", static_cast<double>(report.selected_count())});
  out.measurements.push_back({name, p, 0, "failing_tests", static_cast<double>(report.failing_tests)});
}

void fl_robustness_sweep(const ExperimentConfig& config, RunOutput& out) {
  const CoverageMatrix m = parse_coverage_csv(read_file(require_input(config, "coverage_matrix")));
  RobustnessOptions options;
  options.threshold = param<double>(config, "threshold", kDefaultThreshold);
  options.replicates = *config.replicates;
  options.seed = *config.seed;
  options.mode = ochiai_mode(config);
  options.jobs = config.jobs;
  const auto grid = grid_values(config);
  const auto points = robustness_sweep(m, grid, config.flakiness, options);
  const auto truth = localize(m, m.baseline, options.threshold, options.mode);
  const std::string name(info(config.kind).name);
  for (const auto& point : points) {
    json reps = json::array();
    for (std::size_t r = 0; r < point.replicates.size(); ++r) {
      const auto& metrics = point.replicates[r];
      reps.push_back({{"accuracy", optional_to_json(metrics.accuracy)},
                      {"precision", optional_to_json(metrics.precision)},
                      {"recall", optional_to_json(metrics.recall)}});
      out.measurements.push_back({name, point.p, r, "accuracy", metrics.accuracy});
      out.measurements.push_back({name, point.p, r, "precision", metrics.precision});
      out.measurements.push_back({name, point.p, r, "recall", metrics.recall});
    }
    out.report.results.push_back({{"p", point.p},
                                  {"accuracy", metric_summary_json(point.accuracy)},
                                  {"precision", metric_summary_json(point.precision)},
                                  {"recall", metric_summary_json(point.recall)},
                                  {"mean_selected", point.mean_selected},
                                  {"replicates", std::move(reps)}});
  }
  out.report.summary = {{"threshold", options.threshold},
                        {"statements", m.n_statements()},
                        {"ground_truth_selected", truth.selected_count()}};
}

void flake_report(const ExperimentConfig& config, RunOutput& out) {
  const TestReport report = parse_junit_xml(read_file(require_input(config, "junit")));
  RngStream rng(*config.seed, 0);
  const auto flaked = perturb_report(report, config.flakiness, rng);
  out.xml = emit_junit_xml(flaked.report, flaked.counters);
  for (std::size_t i = 0; i < report.cases.size(); ++i) {
    out.report.results.push_back({{"name", report.cases[i].name},
                                  {"group", report.cases[i].group},
                                  {"baseline", to_string(report.cases[i].outcome)},
                                  {"outcome", to_string(flaked.report.cases[i].outcome)}});
  }
  const auto& c = flaked.counters;
  out.report.summary = {{"nbTests", c.nbTests},
                        {"nbPassed", c.nbPassed},
                        {"nbFlaked", c.nbFlaked},
                        {"nbRealFailed", c.nbRealFailed}};
  const std::string name(info(config.kind).name);
  const double p = config.flakiness.probability;
  out.measurements.push_back({name, p, 0, "nbTests", static_cast<double>(c.nbTests)});
  out.measurements.push_back({name, p, 0, "nbPassed", static_cast<double>(c.nbPassed)});
  out.measurements.push_back({name, p, 0, "nbFlaked", static_cast<double>(c.nbFlaked)});
  out.measurements.push_back({name, p, 0, "nbRealFailed", static_cast<double>(c.nbRealFailed)});
}

// ------------------------------------------------------------ config parsing

template <typename T>
std::optional<T> get_optional(const json& obj, const char* key, const char* what) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  try {
    return it->template get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("config field '") + key + "' must be " + what);
  }
}

FlakinessModel parse_flakiness(const json& j, bool& probability_given) {
  FlakinessModel model;
  if (!j.is_object()) throw ParseError("config field 'flakiness' must be an object");
  if (auto p = get_optional<double>(j, "p", "a number")) {
    model.probability = *p;
    probability_given = true;
  }
  if (auto it = j.find("per_test"); it != j.end()) {
    if (!it->is_object()) throw ParseError("flakiness.per_test must map test labels to probabilities");
    for (const auto& [label, p] : it->items()) {
      if (!p.is_number()) throw ParseError("flakiness.per_test values must be numbers");
      model.per_test[label] = p.get<double>();
    }
  }
  if (auto d = get_optional<std::string>(j, "direction", "a string")) {
    auto dir = parse_direction(*d);
    if (!dir) throw ParseError("flakiness.direction must be pass-to-fail, fail-to-pass or both");
    model.direction = *dir;
  }
  if (auto it = j.find("scope"); it != j.end()) {
    if (it->is_string() && *it == "all") {
      model.scope = Scope::all();
    } else if (it->is_object() && it->size() == 1 &&
               (it->contains("groups") || it->contains("tests"))) {
      const bool groups = it->contains("groups");
      const json& names = groups ? (*it)["groups"] : (*it)["tests"];
      if (!names.is_array()) throw ParseError("flakiness.scope lists must be arrays of strings");
      std::vector<std::string> list;
      for (const auto& n : names) {
        if (!n.is_string()) throw ParseError("flakiness.scope lists must be arrays of strings");
        list.push_back(n.get<std::string>());
      }
      model.scope = groups ? Scope::groups(std::move(list)) : Scope::tests(std::move(list));
    } else {
      throw ParseError(R"(flakiness.scope must be "all", {"groups": [...]} or {"tests": [...]})");
    }
  }
  if (auto violation = find_violation(model)) throw InvariantError(*violation);
  return model;
}

json scope_json(const Scope& scope) {
  switch (scope.kind) {
    case Scope::Kind::All: return "all";
    case Scope::Kind::Groups: return {{"groups", scope.names}};
    case Scope::Kind::Tests: return {{"tests", scope.names}};
  }
  return "all";
}

void write_atomically(const std::vector<std::pair<fs::path, std::string>>& files) {
  std::vector<std::pair<fs::path, fs::path>> staged;
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& [tmp, target] : staged) fs::remove(tmp, ec);
  };
  for (const auto& [path, content] : files) {
    fs::path tmp = path;
    tmp += ".partial";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      cleanup();
      throw IoError("cannot write output file '" + path.string() + "'");
    }
    staged.emplace_back(tmp, path);
    out << content;
    out.close();
    if (!out) {
      cleanup();
      throw IoError("error while writing '" + path.string() + "'");
    }
  }
  for (const auto& [tmp, target] : staged) {
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
      cleanup();
      throw IoError("cannot move output into place at '" + target.string() + "': " + ec.message());
    }
  }
}

}  // namespace

std::string_view to_string(ExperimentKind kind) { return info(kind).name; }

std::optional<ExperimentKind> parse_experiment_kind(std::string_view name) {
  for (const auto& k : kKinds) {
    if (k.name == name) return k.kind;
  }
  return std::nullopt;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& k : kKinds) out.emplace_back(k.name);
    return out;
  }();
  return names;
}

std::vector<double> Grid::values() const {
  if (!(step > 0.0) || !(start >= 0.0) || !(end <= 1.0) || end < start) {
    throw InvariantError("sweep grid must satisfy 0 <= p_start <= p_end <= 1 and p_step > 0");
  }
  const auto n = static_cast<std::size_t>(std::floor((end - start) / step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12;
    out.push_back(std::min(v, 1.0));
  }
  return out;
}

ExperimentConfig parse_config(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ParseError("config must be a JSON object");
  ExperimentConfig config;

  const auto kind_name = get_optional<std::string>(doc, "experiment", "a string");
  if (!kind_name) throw ParseError("config needs an 'experiment' field");
  auto kind = parse_experiment_kind(*kind_name);
  if (!kind) throw ParseError("unknown experiment '" + *kind_name + "'");
  config.kind = *kind;

  if (auto it = doc.find("inputs"); it != doc.end()) {
    if (!it->is_object()) throw ParseError("config field 'inputs' must map roles to paths");
    for (const auto& [role, path] : it->items()) {
      if (!path.is_string()) throw ParseError("input '" + role + "' must be a path string");
      fs::path p = path.get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      config.inputs[role] = p;
    }
  }
  if (auto it = doc.find("flakiness"); it != doc.end()) {
    config.flakiness = parse_flakiness(*it, config.probability_given);
  }
  if (auto it = doc.find("sweep"); it != doc.end()) {
    if (!it->is_object()) throw ParseError("config field 'sweep' must be an object");
    Grid grid;
    grid.start = get_optional<double>(*it, "p_start", "a number").value_or(grid.start);
    grid.end = get_optional<double>(*it, "p_end", "a number").value_or(grid.end);
    grid.step = get_optional<double>(*it, "p_step", "a number").value_or(grid.step);
    grid.values();
    config.sweep = grid;
  }
  if (auto it = doc.find("replicates"); it != doc.end() && !it->is_null()) {
    if (!it->is_number_unsigned() || it->get<std::size_t>() == 0) {
      throw ParseError("config field 'replicates' must be a positive integer");
    }
    config.replicates = it->get<std::size_t>();
  }
  if (auto it = doc.find("seed"); it != doc.end() && !it->is_null()) {
    if (!it->is_number_unsigned()) throw ParseError("config field 'seed' must be a non-negative integer");
    config.seed = it->get<std::uint64_t>();
  }
  if (auto it = doc.find("jobs"); it != doc.end()) {
    if (!it->is_number_unsigned() || it->get<unsigned>() == 0) {
      throw ParseError("config field 'jobs' must be a positive integer");
    }
    config.jobs = it->get<unsigned>();
  }
  if (auto it = doc.find("outputs"); it != doc.end()) {
    if (!it->is_object()) throw ParseError("config field 'outputs' must be an object");
    auto output = [&](const char* key) -> std::optional<fs::path> {
      auto v = get_optional<std::string>(*it, key, "a path string");
      if (!v) return std::nullopt;
      fs::path p = *v;
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      return p;
    };
    config.outputs.json = output("json");
    config.outputs.csv = output("csv");
    config.outputs.xml = output("xml");
  }
  if (auto it = doc.find("params"); it != doc.end()) {
    if (!it->is_object()) throw ParseError("config field 'params' must be an object");
    config.params = *it;
  }
  return config;
}

json config_to_json(const ExperimentConfig& config) {
  json inputs = json::object();
  for (const auto& [role, path] : config.inputs) inputs[role] = path.generic_string();
  json flakiness = {{"p", config.flakiness.probability},
                    {"direction", to_string(config.flakiness.direction)},
                    {"scope", scope_json(config.flakiness.scope)}};
  if (!config.flakiness.per_test.empty()) flakiness["per_test"] = config.flakiness.per_test;
  json doc = {{"experiment", to_string(config.kind)},
              {"inputs", inputs},
              {"flakiness", flakiness},
              {"params", config.params}};
  if (config.replicates) doc["replicates"] = *config.replicates;
  if (config.seed) doc["seed"] = *config.seed;
  if (config.sweep) {
    doc["sweep"] = {{"p_start", config.sweep->start},
                    {"p_end", config.sweep->end},
                    {"p_step", config.sweep->step}};
  }
  return doc;
}

RunOutput execute(const ExperimentConfig& input) {
  if (!input.seed) throw InvariantError("experiment seed is not set");
  ExperimentConfig config = input;
  if (!config.replicates) config.replicates = info(config.kind).default_replicates;

  RunOutput out;
  out.report.experiment = std::string(to_string(config.kind));
  out.report.seed = *config.seed;
  out.report.config = config_to_json(config);
  switch (config.kind) {
    case ExperimentKind::MutationSweep: mutation_sweep(config, out); break;
    case ExperimentKind::SampledSuites: sampled_suites(config, out); break;
    case ExperimentKind::RepairAnalytic: repair_analytic(config, out); break;
    case ExperimentKind::RepairSim: repair_sim(config, out); break;
    case ExperimentKind::FlLocalize: fl_localize(config, out); break;
    case ExperimentKind::FlRobustnessSweep: fl_robustness_sweep(config, out); break;
    case ExperimentKind::FlakeReport: flake_report(config, out); break;
  }
  return out;
}

void run(const ExperimentConfig& config, std::ostream& stdout_sink) {
  const RunOutput out = execute(config);
  const std::string report = emit_report_json(out.report);
  std::vector<std::pair<fs::path, std::string>> files;
  if (config.outputs.json) files.emplace_back(*config.outputs.json, report);
  if (config.outputs.csv) files.emplace_back(*config.outputs.csv, emit_long_csv(out.measurements));
  if (config.outputs.xml) {
    if (!out.xml) throw InvariantError("only flake-report produces an XML output");
    files.emplace_back(*config.outputs.xml, *out.xml);
  }
  write_atomically(files);
  if (!config.outputs.json) stdout_sink << report;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return 2;
    case ErrorKind::Invariant: return 3;
    case ErrorKind::Io: return 4;
  }
  return 1;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"flakilab: laboratory-controlled test flakiness experiments", "flakilab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  struct Flags {
    std::string config;
    std::string input;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replicates;
    std::string out, csv, xml;
    std::optional<unsigned> jobs;
    std::optional<double> p;
    std::string direction;
    std::vector<std::string> scope_groups, scope_tests;
    std::optional<double> p_start, p_end, p_step;
    std::optional<double> threshold;
    std::string ochiai;
    std::optional<std::size_t> budget, population, suites;
    std::optional<double> min_fraction, max_fraction;
    bool targeted = false, compare = false;
  } flags;

  std::string run_config;
  auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a config file");
  run_cmd->add_option("config", run_config, "Experiment config (JSON)")->required();

  auto add_flags = [&](CLI::App* cmd, const KindInfo* k) {
    auto has = [&](std::initializer_list<ExperimentKind> kinds) {
      if (k == nullptr) return true;
      for (auto kind : kinds) {
        if (kind == k->kind) return true;
      }
      return false;
    };
    const std::string input_role = k ? " (" + std::string(k->primary_input) + ")" : "";
    cmd->add_option("-i,--input", flags.input, "Primary input" + input_role);
    cmd->add_option("--seed", flags.seed, "Random seed; drawn and printed when omitted");
    cmd->add_option("--replicates", flags.replicates, "Replicates (runs for repair-sim)");
    cmd->add_option("--out", flags.out, "JSON report path (stdout when omitted)");
    cmd->add_option("--csv", flags.csv, "Long-form CSV path");
    cmd->add_option("--jobs", flags.jobs, "Worker threads");
    cmd->add_option("-p,--probability", flags.p, "Flake probability");
    cmd->add_option("--direction", flags.direction, "pass-to-fail, fail-to-pass or both");
    cmd->add_option("--scope-group", flags.scope_groups, "Restrict flakiness to these test classes");
    cmd->add_option("--scope-test", flags.scope_tests, "Restrict flakiness to these tests");
    if (has({ExperimentKind::MutationSweep, ExperimentKind::FlRobustnessSweep})) {
      cmd->add_option("--p-start", flags.p_start, "First grid probability");
      cmd->add_option("--p-end", flags.p_end, "Last grid probability");
      cmd->add_option("--p-step", flags.p_step, "Grid step");
    }
    if (has({ExperimentKind::FlLocalize, ExperimentKind::FlRobustnessSweep,
             ExperimentKind::RepairSim})) {
      cmd->add_option("--threshold", flags.threshold, "Suspiciousness threshold");
      cmd->add_option("--ochiai", flags.ochiai, "standard or total-failing");
    }
    if (has({ExperimentKind::RepairSim})) {
      cmd->add_option("--budget", flags.budget, "Candidate patches evaluated per run");
      cmd->add_option("--population", flags.population, "Candidates per generation");
      cmd->add_flag("--targeted", flags.targeted, "Localize with real failing tests only");
      cmd->add_flag("--compare", flags.compare, "Paired targeted vs non-targeted runs");
    }
    if (has({ExperimentKind::SampledSuites})) {
      cmd->add_option("--suites", flags.suites, "Number of sampled sub-suites");
      cmd->add_option("--min-fraction", flags.min_fraction, "Smallest suite, as a fraction");
      cmd->add_option("--max-fraction", flags.max_fraction, "Largest suite, as a fraction");
    }
    if (has({ExperimentKind::FlakeReport})) {
      cmd->add_option("--xml", flags.xml, "Perturbed JUnit XML output path");
    }
  };
  add_flags(run_cmd, nullptr);

  std::vector<CLI::App*> experiment_cmds;
  for (const auto& k : kKinds) {
    auto* cmd = app.add_subcommand(std::string(k.name), std::string(k.help));
    experiment_cmds.push_back(cmd);
    cmd->add_option("--config", flags.config, "Experiment config (JSON); flags override its keys");
    add_flags(cmd, &k);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    json doc = json::object();
    fs::path base_dir;
    const std::string config_path = run_cmd->parsed() ? run_config : flags.config;
    if (!config_path.empty()) {
      const std::string text = read_file(config_path);
      try {
        doc = json::parse(text);
      } catch (const json::parse_error& e) {
        throw ParseError("malformed config '" + config_path + "': " + e.what());
      }
      if (!doc.is_object()) throw ParseError("config must be a JSON object");
      base_dir = fs::path(config_path).parent_path();
      if (base_dir.empty()) base_dir = ".";
    }

    if (!run_cmd->parsed()) {
      CLI::App* cmd = nullptr;
      for (auto* c : experiment_cmds) {
        if (c->parsed()) cmd = c;
      }
      if (doc.contains("experiment") && doc["experiment"] != cmd->get_name()) {
        throw ParseError("config describes '" + doc["experiment"].dump() + "' but the subcommand is '" +
                         cmd->get_name() + "'");
      }
      doc["experiment"] = cmd->get_name();
    }
    std::optional<ExperimentKind> kind;
    if (auto it = doc.find("experiment"); it != doc.end() && it->is_string()) {
      kind = parse_experiment_kind(it->get<std::string>());
    }
    if (!kind) throw ParseError("config needs a known 'experiment' field");

    // Flag paths are relative to the working directory, not the config file.
    auto absolute = [](const std::string& p) { return fs::absolute(p).lexically_normal().string(); };
    if (!flags.input.empty()) doc["inputs"][std::string(info(*kind).primary_input)] = absolute(flags.input);
    if (flags.seed) doc["seed"] = *flags.seed;
    if (flags.replicates) doc["replicates"] = *flags.replicates;
    if (flags.jobs) doc["jobs"] = *flags.jobs;
    if (!flags.out.empty()) doc["outputs"]["json"] = absolute(flags.out);
    if (!flags.csv.empty()) doc["outputs"]["csv"] = absolute(flags.csv);
    if (!flags.xml.empty()) doc["outputs"]["xml"] = absolute(flags.xml);
    if (flags.p) doc["flakiness"]["p"] = *flags.p;
    if (!flags.direction.empty()) doc["flakiness"]["direction"] = flags.direction;
    if (!flags.scope_groups.empty()) doc["flakiness"]["scope"] = {{"groups", flags.scope_groups}};
    if (!flags.scope_tests.empty()) doc["flakiness"]["scope"] = {{"tests", flags.scope_tests}};
    if (flags.p_start) doc["sweep"]["p_start"] = *flags.p_start;
    if (flags.p_end) doc["sweep"]["p_end"] = *flags.p_end;
    if (flags.p_step) doc["sweep"]["p_step"] = *flags.p_step;
    if (flags.threshold) doc["params"]["threshold"] = *flags.threshold;
    if (!flags.ochiai.empty()) doc["params"]["ochiai"] = flags.ochiai;
    if (flags.budget) doc["params"]["budget"] = *flags.budget;
    if (flags.population) doc["params"]["population"] = *flags.population;
    if (flags.targeted) doc["params"]["targeted"] = true;
    if (flags.compare) doc["params"]["compare"] = true;
    if (flags.suites) doc["params"]["suites"] = *flags.suites;
    if (flags.min_fraction || flags.max_fraction) {
      std::vector<double> range{0.10, 0.90};
      if (auto it = doc.find("params"); it != doc.end() && it->is_object()) {
        auto given = it->find("size_range");
        if (given != it->end() && given->is_array() && given->size() == 2) {
          range = given->get<std::vector<double>>();
        }
      }
      if (flags.min_fraction) range[0] = *flags.min_fraction;
      if (flags.max_fraction) range[1] = *flags.max_fraction;
      doc["params"]["size_range"] = range;
    }

    ExperimentConfig config = parse_config(doc, base_dir);
    if (!config.seed) {
      std::random_device device;
      config.seed = (static_cast<std::uint64_t>(device()) << 32) | device();
    }
    err << "flakilab: " << to_string(config.kind) << " seed " << *config.seed << "\n";
    run(config, out);
    return 0;
  } catch (const Error& e) {
    err << "flakilab: error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "flakilab: internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace flakilab::driver
