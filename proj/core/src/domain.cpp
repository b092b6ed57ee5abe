#include "flakilab/domain.hpp"

#include <algorithm>
#include <iterator>
#include <set>
#include <unordered_set>

#include "flakilab/error.hpp"

namespace flakilab {

std::string_view to_string(Outcome o) noexcept {
  switch (o) {
    case Outcome::Pass: return "pass";
    case Outcome::Fail: return "fail";
    case Outcome::FlakyFail: return "flaky-fail";
    case Outcome::FlakyPass: return "flaky-pass";
  }
  return "pass";
}

std::optional<Outcome> parse_outcome(std::string_view text) noexcept {
  if (text == "pass") return Outcome::Pass;
  if (text == "fail") return Outcome::Fail;
  if (text == "flaky-fail") return Outcome::FlakyFail;
  if (text == "flaky-pass") return Outcome::FlakyPass;
  return std::nullopt;
}

std::string_view to_string(Direction d) noexcept {
  switch (d) {
    case Direction::PassToFail: return "pass-to-fail";
    case Direction::FailToPass: return "fail-to-pass";
    case Direction::Both: return "both";
  }
  return "pass-to-fail";
}

std::optional<Direction> parse_direction(std::string_view text) noexcept {
  if (text == "pass-to-fail") return Direction::PassToFail;
  if (text == "fail-to-pass") return Direction::FailToPass;
  if (text == "both") return Direction::Both;
  return std::nullopt;
}

std::string test_group(std::string_view label) {
  if (auto pos = label.rfind('#'); pos != std::string_view::npos) {
    return std::string(label.substr(0, pos));
  }
  if (auto pos = label.rfind("::"); pos != std::string_view::npos) {
    return std::string(label.substr(0, pos));
  }
  if (auto pos = label.rfind('.'); pos != std::string_view::npos) {
    return std::string(label.substr(0, pos));
  }
  return {};
}

bool KillMatrix::is_killed(std::size_t mutant) const noexcept {
  for (std::size_t t = 0; t < n_tests(); ++t) {
    if (kill.get(t, mutant)) return true;
  }
  return false;
}

std::size_t KillMatrix::killed_count() const noexcept {
  std::vector<std::uint64_t> any((n_mutants() + 63) / 64, 0);
  for (std::size_t t = 0; t < n_tests(); ++t) {
    auto row = kill.row_words(t);
    for (std::size_t w = 0; w < any.size(); ++w) any[w] |= row[w];
  }
  std::size_t n = 0;
  for (std::uint64_t w : any) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::vector<double> resolve_probabilities(const FlakinessModel& model,
                                          std::span<const std::string> tests,
                                          std::span<const std::string> groups) {
  validate(model);
  if (!groups.empty() && groups.size() != tests.size()) {
    throw InvariantError("group labels do not match the number of tests");
  }
  std::vector<std::string> derived;
  if (groups.empty()) {
    derived.reserve(tests.size());
    for (const auto& t : tests) derived.push_back(test_group(t));
    groups = derived;
  }

  std::vector<bool> in_scope(tests.size(), model.scope.kind == Scope::Kind::All);
  if (model.scope.kind != Scope::Kind::All) {
    const auto& keys = model.scope.kind == Scope::Kind::Groups ? groups : tests;
    for (const auto& name : model.scope.names) {
      bool found = false;
      for (std::size_t i = 0; i < tests.size(); ++i) {
        if (keys[i] == name) {
          in_scope[i] = true;
          found = true;
        }
      }
      if (!found) {
        throw InvariantError(std::string("flakiness scope references unknown ") +
                             (model.scope.kind == Scope::Kind::Groups ? "group '" : "test '") +
                             name + "'");
      }
    }
  }

  std::unordered_set<std::string_view> known(tests.begin(), tests.end());
  for (const auto& [label, p] : model.per_test) {
    if (!known.contains(label)) {
      throw InvariantError("per-test probability references unknown test '" + label + "'");
    }
  }

  std::vector<double> probs(tests.size(), 0.0);
  for (std::size_t i = 0; i < tests.size(); ++i) {
    if (!in_scope[i]) continue;
    auto it = model.per_test.find(tests[i]);
    probs[i] = it != model.per_test.end() ? it->second : model.probability;
  }
  return probs;
}

std::vector<PatchRecord> RepairScenario::valid() const {
  std::vector<PatchRecord> out;
  std::copy_if(patches.begin(), patches.end(), std::back_inserter(out),
               [](const PatchRecord& p) { return p.is_valid; });
  return out;
}

std::vector<PatchRecord> RepairScenario::genuine() const {
  std::vector<PatchRecord> out;
  std::copy_if(patches.begin(), patches.end(), std::back_inserter(out),
               [](const PatchRecord& p) { return p.is_genuine; });
  return out;
}

namespace {

std::optional<std::string> unique_labels(std::span<const std::string> labels,
                                         std::string_view what) {
  std::set<std::string_view> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) {
      return "duplicate " + std::string(what) + " label '" + l + "'";
    }
  }
  return std::nullopt;
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

std::optional<std::string> plain_baseline(std::span<const Outcome> baseline) {
  for (Outcome o : baseline) {
    if (o != Outcome::Pass && o != Outcome::Fail) return "baseline outcomes must be pass or fail";
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string> find_violation(const CoverageMatrix& m) {
  if (m.cover.rows() != m.n_tests() || m.cover.cols() != m.n_statements()) {
    return "coverage matrix is " + std::to_string(m.cover.rows()) + "x" +
           std::to_string(m.cover.cols()) + " but labels describe " +
           std::to_string(m.n_tests()) + "x" + std::to_string(m.n_statements());
  }
  if (m.baseline.size() != m.n_tests()) {
    return "baseline has " + std::to_string(m.baseline.size()) + " outcomes for " +
           std::to_string(m.n_tests()) + " tests";
  }
  if (auto e = plain_baseline(m.baseline)) return e;
  if (auto e = unique_labels(m.tests, "test")) return e;
  if (auto e = unique_labels(m.statements, "statement")) return e;
  return std::nullopt;
}

std::optional<std::string> find_violation(const KillMatrix& m) {
  if (m.cover.rows() != m.n_tests() || m.cover.cols() != m.n_mutants() ||
      m.kill.rows() != m.n_tests() || m.kill.cols() != m.n_mutants()) {
    return "kill matrix dimensions do not match " + std::to_string(m.n_tests()) +
           " tests x " + std::to_string(m.n_mutants()) + " mutants";
  }
  if (m.baseline.size() != m.n_tests()) {
    return "baseline has " + std::to_string(m.baseline.size()) + " outcomes for " +
           std::to_string(m.n_tests()) + " tests";
  }
  if (!m.kill.is_subset_of(m.cover)) {
    for (std::size_t t = 0; t < m.n_tests(); ++t) {
      for (std::size_t k = 0; k < m.n_mutants(); ++k) {
        if (m.kill.get(t, k) && !m.cover.get(t, k)) {
          return "test '" + m.tests[t] + "' kills mutant '" + m.mutants[k] +
                 "' without covering it";
        }
      }
    }
  }
  if (auto e = plain_baseline(m.baseline)) return e;
  if (auto e = unique_labels(m.tests, "test")) return e;
  if (auto e = unique_labels(m.mutants, "mutant")) return e;
  return std::nullopt;
}

std::optional<std::string> find_violation(const FlakinessModel& m) {
  if (!is_probability(m.probability)) {
    return "flake probability " + std::to_string(m.probability) + " is outside [0, 1]";
  }
  for (const auto& [label, p] : m.per_test) {
    if (!is_probability(p)) {
      return "flake probability of '" + label + "' is outside [0, 1]";
    }
  }
  return std::nullopt;
}

std::optional<std::string> find_violation(const RepairScenario& s) {
  std::set<std::string_view> ids;
  for (const auto& p : s.patches) {
    if (!ids.insert(p.id).second) return "duplicate patch id '" + p.id + "'";
    if (p.is_genuine && !p.is_valid) return "patch '" + p.id + "' is genuine but not valid";
    if (p.is_valid && p.covering_count() == 0) {
      return "valid patch '" + p.id + "' is covered by no test";
    }
  }
  return std::nullopt;
}

std::optional<std::string> find_violation(const SelectionMetrics& s) {
  for (const auto& v : {s.accuracy, s.precision, s.recall}) {
    if (v && !is_probability(*v)) return "selection metric outside [0, 1]";
  }
  return std::nullopt;
}

template <typename T>
void validate(const T& value) {
  if (auto violation = find_violation(value)) throw InvariantError(*violation);
}

template void validate(const CoverageMatrix&);
template void validate(const KillMatrix&);
template void validate(const FlakinessModel&);
template void validate(const RepairScenario&);
template void validate(const SelectionMetrics&);

}  // namespace flakilab
