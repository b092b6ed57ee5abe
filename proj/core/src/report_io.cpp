#include "flakilab/report_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "flakilab/error.hpp"
#include "flakilab/flakiness.hpp"

namespace flakilab {

namespace pt = boost::property_tree;

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw InvariantError("cannot format number");
  return std::string(buf, end);
}

namespace {

std::optional<double> parse_double(std::string_view text) {
  std::string cleaned;
  for (char c : text) {
    if (c != ',' && c != ' ') cleaned.push_back(c);
  }
  if (cleaned.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = cleaned.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, cleaned.data() + cleaned.size(), v);
  if (ec != std::errc() || ptr != cleaned.data() + cleaned.size()) return std::nullopt;
  return v;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

// ---------------------------------------------------------------- JUnit XML

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      case '\n': out += "&#10;"; break;
      case '\r': out += "&#13;"; break;
      case '\t': out += "&#9;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string attr(const pt::ptree& node, const char* name) {
  if (auto attrs = node.get_child_optional("<xmlattr>")) {
    if (auto v = attrs->get_optional<std::string>(name)) return *v;
  }
  return {};
}

bool has_attr(const pt::ptree& node, const char* name) {
  auto attrs = node.get_child_optional("<xmlattr>");
  return attrs && attrs->get_child_optional(name);
}

TestCaseRecord read_testcase(const pt::ptree& node) {
  TestCaseRecord tc;
  if (!has_attr(node, "name")) throw ParseError("testcase without a name attribute");
  tc.name = attr(node, "name");
  tc.group = attr(node, "classname");
  if (has_attr(node, "time")) {
    auto t = parse_double(attr(node, "time"));
    if (!t || !(*t >= 0.0)) {
      throw ParseError("testcase '" + tc.name + "' has an invalid time '" +
                       attr(node, "time") + "'");
    }
    tc.duration = *t;
  }

  const pt::ptree* failure = nullptr;
  const pt::ptree* flaky = nullptr;
  for (const auto& [tag, child] : node) {
    if (tag == "skipped") {
      throw ParseError("testcase '" + tc.name + "' is skipped; skipped tests have no outcome");
    }
    if ((tag == "failure" || tag == "error") && failure == nullptr) {
      failure = &child;
      tc.failure_tag = tag;
    } else if (tag == "flakyFailure" && flaky == nullptr) {
      flaky = &child;
    }
  }
  if (failure != nullptr) {
    tc.failure_type = attr(*failure, "type");
    tc.failure_message = attr(*failure, "message");
    tc.outcome = tc.failure_type == kFlakyExceptionType ? Outcome::FlakyFail : Outcome::Fail;
  } else if (flaky != nullptr) {
    tc.failure_tag = "flakyFailure";
    tc.failure_type = attr(*flaky, "type");
    tc.failure_message = attr(*flaky, "message");
    tc.outcome = Outcome::FlakyPass;
  }
  return tc;
}

void read_suite(const pt::ptree& suite, TestReport& report) {
  for (const auto& [tag, child] : suite) {
    if (tag == "testcase") {
      report.cases.push_back(read_testcase(child));
    } else if (tag == "testsuite") {
      read_suite(child, report);
    }
  }
}

}  // namespace

std::optional<std::string> find_violation(const TestReport& r) {
  std::set<std::pair<std::string_view, std::string_view>> seen;
  for (const auto& tc : r.cases) {
    if (!seen.insert({tc.group, tc.name}).second) {
      return "duplicate testcase '" + tc.group + "' / '" + tc.name + "'";
    }
    if (!(tc.duration >= 0.0)) return "testcase '" + tc.name + "' has a negative duration";
    const bool real_failure = tc.outcome == Outcome::Fail;
    if (real_failure && tc.failure_type == kFlakyExceptionType) {
      return "testcase '" + tc.name + "' is a real failure typed as a flaky one";
    }
    if (real_failure && tc.failure_tag != "failure" && tc.failure_tag != "error") {
      return "failing testcase '" + tc.name + "' must use a failure or error element";
    }
    const bool flaky = tc.outcome == Outcome::FlakyFail || tc.outcome == Outcome::FlakyPass;
    if (flaky && tc.failure_type != kFlakyExceptionType) {
      return "flaky testcase '" + tc.name + "' must carry the FlakiException type";
    }
    if (tc.outcome == Outcome::FlakyFail && tc.failure_tag != "failure" &&
        tc.failure_tag != "error") {
      return "flaky failure '" + tc.name + "' must use a failure or error element";
    }
    if (tc.outcome == Outcome::FlakyPass && tc.failure_tag != "flakyFailure") {
      return "flaky pass '" + tc.name + "' must use a flakyFailure element";
    }
    if (tc.outcome == Outcome::Pass &&
        !(tc.failure_tag.empty() && tc.failure_type.empty() && tc.failure_message.empty())) {
      return "passing testcase '" + tc.name + "' carries failure details";
    }
  }
  return std::nullopt;
}

TestReport parse_junit_xml(std::string_view xml) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, tree);
  } catch (const std::exception& e) {
    throw ParseError(std::string("malformed XML: ") + e.what());
  }

  TestReport report;
  if (auto suites = tree.get_child_optional("testsuites")) {
    report.suite_name = attr(*suites, "name");
    if (report.suite_name.empty()) {
      if (auto first = suites->get_child_optional("testsuite")) {
        report.suite_name = attr(*first, "name");
      }
    }
    read_suite(*suites, report);
  } else if (auto suite = tree.get_child_optional("testsuite")) {
    report.suite_name = attr(*suite, "name");
    read_suite(*suite, report);
  } else {
    throw ParseError("no testsuite or testsuites root element");
  }
  if (auto violation = find_violation(report)) throw ParseError(*violation);
  return report;
}

std::string emit_junit_xml(const TestReport& report,
                           const std::optional<FlakeCounters>& counters) {
  if (auto violation = find_violation(report)) throw InvariantError(*violation);

  std::size_t failures = 0;
  std::size_t errors = 0;
  double total_time = 0.0;
  for (const auto& tc : report.cases) {
    if (is_failing(tc.outcome)) (tc.failure_tag == "error" ? errors : failures)++;
    total_time += tc.duration;
  }

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<testsuite name=\"" << xml_escape(report.suite_name) << "\" tests=\""
      << report.cases.size() << "\" failures=\"" << failures << "\" errors=\"" << errors
      << "\" skipped=\"0\" time=\"" << format_double(total_time) << "\">\n";
  if (counters) {
    out << "  <properties>\n";
    out << "    <property name=\"nbTests\" value=\"" << counters->nbTests << "\"/>\n";
    out << "    <property name=\"nbPassed\" value=\"" << counters->nbPassed << "\"/>\n";
    out << "    <property name=\"nbFlaked\" value=\"" << counters->nbFlaked << "\"/>\n";
    out << "    <property name=\"nbRealFailed\" value=\"" << counters->nbRealFailed << "\"/>\n";
    out << "  </properties>\n";
  }
  for (const auto& tc : report.cases) {
    out << "  <testcase name=\"" << xml_escape(tc.name) << "\" classname=\""
        << xml_escape(tc.group) << "\" time=\"" << format_double(tc.duration) << "\"";
    if (tc.outcome == Outcome::Pass) {
      out << "/>\n";
      continue;
    }
    out << ">\n    <" << tc.failure_tag;
    if (!tc.failure_type.empty()) out << " type=\"" << xml_escape(tc.failure_type) << "\"";
    if (!tc.failure_message.empty()) {
      out << " message=\"" << xml_escape(tc.failure_message) << "\"";
    }
    out << "/>\n  </testcase>\n";
  }
  out << "</testsuite>\n";
  return out.str();
}

FlakedReport perturb_report(const TestReport& report, const FlakinessModel& model,
                            RngStream& rng) {
  if (auto violation = find_violation(report)) throw InvariantError(*violation);
  std::vector<std::string> names;
  std::vector<std::string> groups;
  std::vector<Outcome> outcomes;
  for (const auto& tc : report.cases) {
    names.push_back(tc.name);
    groups.push_back(tc.group);
    outcomes.push_back(tc.outcome);
  }
  auto perturbed = perturb_outcomes(outcomes, names, groups, model, rng);

  FlakedReport out{report, perturbed.counters};
  for (std::size_t i = 0; i < out.report.cases.size(); ++i) {
    auto& tc = out.report.cases[i];
    if (tc.outcome == perturbed.outcomes[i]) continue;
    tc.outcome = perturbed.outcomes[i];
    tc.failure_tag = tc.outcome == Outcome::FlakyFail ? "failure" : "flakyFailure";
    tc.failure_type = std::string(kFlakyExceptionType);
    tc.failure_message = "flaky outcome injected by flakilab";
  }
  return out;
}

std::string emit_flaked_report(const TestReport& report, const FlakinessModel& model,
                               RngStream& rng) {
  auto flaked = perturb_report(report, model, rng);
  return emit_junit_xml(flaked.report, flaked.counters);
}

// ---------------------------------------------------------------- matrix CSV

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!trim(line).empty()) lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto end = line.find(',', start);
    if (end == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, end - start)));
    start = end + 1;
  }
  return fields;
}

std::optional<Outcome> parse_baseline(std::string_view cell) {
  std::string lower;
  for (char c : cell) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "pass") return Outcome::Pass;
  if (lower == "fail") return Outcome::Fail;
  return std::nullopt;
}

void check_csv_label(const std::string& label) {
  if (label.empty() || label.find_first_of(",\r\n") != std::string::npos ||
      trim(label).size() != label.size()) {
    throw InvariantError("label '" + label + "' cannot be written to CSV");
  }
}

}  // namespace

std::variant<CoverageMatrix, KillMatrix> parse_matrix_csv(std::string_view csv,
                                                          MatrixKind kind) {
  const auto lines = split_lines(csv);
  if (lines.empty()) throw ParseError("matrix CSV is empty");

  const auto header = split_fields(lines.front());
  const bool has_baseline = header.size() >= 2 && header.back() == "baseline";
  const std::size_t n_cols = header.size() - 1 - (has_baseline ? 1 : 0);
  std::vector<std::string> columns;
  for (std::size_t c = 0; c < n_cols; ++c) {
    if (header[c + 1].empty()) throw ParseError("empty column label in header");
    columns.emplace_back(header[c + 1]);
  }
  const std::size_t n_rows = lines.size() - 1;

  std::vector<std::string> tests;
  std::vector<Outcome> baseline;
  BitMatrix cover(n_rows, n_cols);
  BitMatrix kill(n_rows, n_cols);
  const char max_cell = kind == MatrixKind::Kill ? '2' : '1';

  for (std::size_t r = 0; r < n_rows; ++r) {
    const auto fields = split_fields(lines[r + 1]);
    if (fields.size() != header.size()) {
      throw ParseError("row " + std::to_string(r + 2) + " has " +
                       std::to_string(fields.size()) + " fields, header has " +
                       std::to_string(header.size()));
    }
    if (fields[0].empty()) throw ParseError("row " + std::to_string(r + 2) + " has no test label");
    tests.emplace_back(fields[0]);
    for (std::size_t c = 0; c < n_cols; ++c) {
      const auto cell = fields[c + 1];
      if (cell.size() != 1 || cell[0] < '0' || cell[0] > max_cell) {
        throw ParseError("illegal cell '" + std::string(cell) + "' at row " +
                         std::to_string(r + 2) + ", column '" + columns[c] + "'");
      }
      if (cell[0] >= '1') cover.set(r, c);
      if (cell[0] == '2') kill.set(r, c);
    }
    if (has_baseline) {
      auto outcome = parse_baseline(fields.back());
      if (!outcome) {
        throw ParseError("illegal baseline '" + std::string(fields.back()) + "' at row " +
                         std::to_string(r + 2));
      }
      baseline.push_back(*outcome);
    } else {
      baseline.push_back(Outcome::Pass);
    }
  }

  auto reject_invalid = [](const auto& m) {
    if (auto violation = find_violation(m)) throw ParseError(*violation);
  };
  if (kind == MatrixKind::Coverage) {
    CoverageMatrix m{std::move(tests), std::move(columns), std::move(cover), std::move(baseline)};
    reject_invalid(m);
    return m;
  }
  KillMatrix m{std::move(tests), std::move(columns), std::move(cover), std::move(kill),
               std::move(baseline)};
  reject_invalid(m);
  return m;
}

CoverageMatrix parse_coverage_csv(std::string_view csv) {
  return std::get<CoverageMatrix>(parse_matrix_csv(csv, MatrixKind::Coverage));
}

KillMatrix parse_kill_csv(std::string_view csv) {
  return std::get<KillMatrix>(parse_matrix_csv(csv, MatrixKind::Kill));
}

namespace {

template <typename Cell>
std::string emit_csv(const std::vector<std::string>& tests,
                     const std::vector<std::string>& columns,
                     const std::vector<Outcome>& baseline, Cell&& cell) {
  for (const auto& l : tests) check_csv_label(l);
  for (const auto& l : columns) check_csv_label(l);
  std::string out = "test";
  for (const auto& c : columns) {
    out += ',';
    out += c;
  }
  out += ",baseline\n";
  for (std::size_t t = 0; t < tests.size(); ++t) {
    out += tests[t];
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out += ',';
      out += cell(t, c);
    }
    out += baseline[t] == Outcome::Fail ? ",fail\n" : ",pass\n";
  }
  return out;
}

}  // namespace

std::string emit_matrix_csv(const CoverageMatrix& m) {
  validate(m);
  return emit_csv(m.tests, m.statements, m.baseline,
                  [&](std::size_t t, std::size_t s) { return m.cover.get(t, s) ? '1' : '0'; });
}

std::string emit_matrix_csv(const KillMatrix& m) {
  validate(m);
  return emit_csv(m.tests, m.mutants, m.baseline, [&](std::size_t t, std::size_t k) {
    if (m.kill.get(t, k)) return '2';
    return m.cover.get(t, k) ? '1' : '0';
  });
}

// ---------------------------------------------------------------- JSON report

std::string emit_report_json(const ExperimentReport& report) {
  nlohmann::json doc = {
      {"tool", kToolName},
      {"tool_version", report.tool_version},
      {"experiment", report.experiment},
      {"seed", report.seed},
      {"config", report.config},
      {"results", report.results},
      {"summary", report.summary},
  };
  return doc.dump(2) + "\n";
}

ExperimentReport parse_report_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed JSON report: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("JSON report must be an object");
  auto require = [&](const char* key, auto check, const char* what) -> const nlohmann::json& {
    auto it = doc.find(key);
    if (it == doc.end() || !check(*it)) {
      throw ParseError(std::string("JSON report field '") + key + "' must be " + what);
    }
    return *it;
  };
  ExperimentReport r;
  r.experiment = require("experiment", [](const auto& j) { return j.is_string(); }, "a string")
                     .template get<std::string>();
  r.tool_version = require("tool_version", [](const auto& j) { return j.is_string(); }, "a string")
                       .template get<std::string>();
  r.seed = require("seed", [](const auto& j) { return j.is_number_unsigned(); },
                   "an unsigned integer")
               .template get<std::uint64_t>();
  r.config = require("config", [](const auto& j) { return j.is_object(); }, "an object");
  r.results = require("results", [](const auto& j) { return j.is_array(); }, "an array");
  r.summary = require("summary", [](const auto& j) { return j.is_object(); }, "an object");
  return r;
}

// ---------------------------------------------------------------- long CSV

std::string emit_long_csv(const std::vector<Measurement>& rows) {
  std::string out = "experiment,p,replicate,metric,value\n";
  for (const auto& m : rows) {
    check_csv_label(m.experiment);
    check_csv_label(m.metric);
    out += m.experiment;
    out += ',';
    out += format_double(m.p);
    out += ',';
    out += std::to_string(m.replicate);
    out += ',';
    out += m.metric;
    out += ',';
    out += m.value ? format_double(*m.value) : "NA";
    out += '\n';
  }
  return out;
}

std::vector<Measurement> parse_long_csv(std::string_view csv) {
  const auto lines = split_lines(csv);
  if (lines.empty() || split_fields(lines.front()) !=
                           std::vector<std::string_view>{"experiment", "p", "replicate",
                                                         "metric", "value"}) {
    throw ParseError("long CSV must start with experiment,p,replicate,metric,value");
  }
  std::vector<Measurement> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i]);
    if (f.size() != 5) throw ParseError("long CSV row " + std::to_string(i + 1) + " is ragged");
    Measurement m;
    m.experiment = std::string(f[0]);
    auto p = parse_double(f[1]);
    if (!p) throw ParseError("long CSV row " + std::to_string(i + 1) + " has a bad p");
    m.p = *p;
    std::size_t rep = 0;
    auto [ptr, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), rep);
    if (ec != std::errc() || ptr != f[2].data() + f[2].size()) {
      throw ParseError("long CSV row " + std::to_string(i + 1) + " has a bad replicate");
    }
    m.replicate = rep;
    m.metric = std::string(f[3]);
    if (f[4] != "NA") {
      auto v = parse_double(f[4]);
      if (!v) throw ParseError("long CSV row " + std::to_string(i + 1) + " has a bad value");
      m.value = *v;
    }
    rows.push_back(std::move(m));
  }
  return rows;
}

// ---------------------------------------------------------------- scenarios

ScenarioFile parse_scenario_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed scenario JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("patches") || !doc["patches"].is_array()) {
    throw ParseError("scenario must be an object with a 'patches' array");
  }
  ScenarioFile file;
  if (auto it = doc.find("p"); it != doc.end()) {
    if (!it->is_number()) throw ParseError("scenario field 'p' must be a number");
    file.p = it->get<double>();
  }
  for (const auto& entry : doc["patches"]) {
    if (!entry.is_object()) throw ParseError("every patch must be an object");
    PatchRecord patch;
    auto id = entry.find("id");
    if (id == entry.end() || !(id->is_string() || id->is_number_integer())) {
      throw ParseError("every patch needs a string id");
    }
    patch.id = id->is_string() ? id->get<std::string>() : id->dump();
    if (auto it = entry.find("covering_tests"); it != entry.end()) {
      if (!it->is_number_unsigned()) {
        throw ParseError("patch '" + patch.id + "': covering_tests must be a non-negative integer");
      }
      patch.covering_tests = it->get<std::size_t>();
    }
    if (auto it = entry.find("covering_test_ids"); it != entry.end()) {
      if (!it->is_array()) throw ParseError("patch '" + patch.id + "': covering_test_ids must be an array");
      for (const auto& t : *it) {
        if (!t.is_string()) throw ParseError("patch '" + patch.id + "': test ids must be strings");
        patch.covering_test_ids.push_back(t.get<std::string>());
      }
    }
    for (const char* key : {"valid", "genuine"}) {
      auto it = entry.find(key);
      if (it != entry.end() && !it->is_boolean()) {
        throw ParseError("patch '" + patch.id + "': " + key + " must be a boolean");
      }
    }
    patch.is_valid = entry.value("valid", false);
    patch.is_genuine = entry.value("genuine", false);
    file.scenario.patches.push_back(std::move(patch));
  }
  if (auto violation = find_violation(file.scenario)) throw ParseError(*violation);
  if (file.p && !(*file.p >= 0.0 && *file.p <= 1.0)) {
    throw ParseError("scenario probability is outside [0, 1]");
  }
  return file;
}

std::string emit_scenario_json(const ScenarioFile& file) {
  validate(file.scenario);
  nlohmann::json patches = nlohmann::json::array();
  for (const auto& patch : file.scenario.patches) {
    nlohmann::json entry = {{"id", patch.id}, {"valid", patch.is_valid}, {"genuine", patch.is_genuine}};
    if (patch.covering_test_ids.empty()) {
      entry["covering_tests"] = patch.covering_tests;
    } else {
      entry["covering_test_ids"] = patch.covering_test_ids;
    }
    patches.push_back(std::move(entry));
  }
  nlohmann::json doc = {{"patches", std::move(patches)}};
  if (file.p) doc["p"] = *file.p;
  return doc.dump(2) + "\n";
}

}  // namespace flakilab
