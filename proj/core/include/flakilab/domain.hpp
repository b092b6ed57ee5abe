#pragma once

// Shared value types for recorded test executions. Nothing in here performs
// I/O or draws random numbers.
//
// Size envelope: matrices are stored densely and are intended for up to
// about 10^4 tests by 10^4 statements or mutants.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flakilab/bit_matrix.hpp"

namespace flakilab {

/// Outcome of one test execution. `FlakyFail` is a passing test that was
/// turned into a failure by injected flakiness; `FlakyPass` is the converse.
enum class Outcome : std::uint8_t { Pass, Fail, FlakyFail, FlakyPass };

constexpr bool is_failing(Outcome o) noexcept {
  return o == Outcome::Fail || o == Outcome::FlakyFail;
}

std::string_view to_string(Outcome o) noexcept;
std::optional<Outcome> parse_outcome(std::string_view text) noexcept;

/// Tests x statements coverage with the unperturbed outcome of every test.
struct CoverageMatrix {
  std::vector<std::string> tests;
  std::vector<std::string> statements;
  BitMatrix cover;
  std::vector<Outcome> baseline;

  std::size_t n_tests() const noexcept { return tests.size(); }
  std::size_t n_statements() const noexcept { return statements.size(); }

  bool operator==(const CoverageMatrix&) const = default;
};

/// Tests x mutants execution matrix. A cell can be uncovered,
/// covered-survived, or covered-killed; `kill` is always a subset of
/// `cover`. `baseline` is each test's outcome on the original program.
struct KillMatrix {
  std::vector<std::string> tests;
  std::vector<std::string> mutants;
  BitMatrix cover;
  BitMatrix kill;
  std::vector<Outcome> baseline;

  std::size_t n_tests() const noexcept { return tests.size(); }
  std::size_t n_mutants() const noexcept { return mutants.size(); }

  bool is_killed(std::size_t mutant) const noexcept;
  std::size_t killed_count() const noexcept;

  bool operator==(const KillMatrix&) const = default;
};

enum class Direction : std::uint8_t { PassToFail, FailToPass, Both };

std::string_view to_string(Direction d) noexcept;
std::optional<Direction> parse_direction(std::string_view text) noexcept;

/// Group (test class) of a test label: the part before the last `#` or
/// `::`, otherwise before the last `.`, otherwise empty.
std::string test_group(std::string_view label);

/// Which tests may flake.
struct Scope {
  enum class Kind : std::uint8_t { All, Groups, Tests };

  Kind kind = Kind::All;
  std::vector<std::string> names;

  static Scope all() { return {}; }
  static Scope groups(std::vector<std::string> g) { return {Kind::Groups, std::move(g)}; }
  static Scope tests(std::vector<std::string> t) { return {Kind::Tests, std::move(t)}; }

  bool operator==(const Scope&) const = default;
};

struct FlakinessModel {
  /// Flake probability of every in-scope test without an override.
  double probability = 0.0;
  /// Per-test overrides keyed by test label. Only consulted for in-scope tests.
  std::map<std::string, double> per_test;
  Direction direction = Direction::PassToFail;
  Scope scope;

  static FlakinessModel uniform(double p, Direction d = Direction::PassToFail) {
    FlakinessModel m;
    m.probability = p;
    m.direction = d;
    return m;
  }

  bool operator==(const FlakinessModel&) const = default;
};

/// Per-test flake probabilities for `tests`, zero outside the scope.
/// `groups[i]` is the group of `tests[i]`; when `groups` is empty the groups
/// are derived with `test_group`. Throws InvariantError when the scope or an
/// override names a test or group that does not exist.
std::vector<double> resolve_probabilities(const FlakinessModel& model,
                                          std::span<const std::string> tests,
                                          std::span<const std::string> groups = {});

struct PatchRecord {
  std::string id;
  /// |T_v|. Ignored when `covering_test_ids` is non-empty.
  std::size_t covering_tests = 0;
  std::vector<std::string> covering_test_ids;
  bool is_valid = false;
  bool is_genuine = false;

  std::size_t covering_count() const noexcept {
    return covering_test_ids.empty() ? covering_tests : covering_test_ids.size();
  }

  bool operator==(const PatchRecord&) const = default;
};

struct RepairScenario {
  std::vector<PatchRecord> patches;

  std::vector<PatchRecord> valid() const;
  std::vector<PatchRecord> genuine() const;

  bool operator==(const RepairScenario&) const = default;
};

/// Counters of one perturbed run, named after the runner's globals.
struct FlakeCounters {
  std::size_t nbTests = 0;
  std::size_t nbPassed = 0;
  std::size_t nbFlaked = 0;
  std::size_t nbRealFailed = 0;

  bool consistent() const noexcept {
    return nbTests == nbPassed + nbFlaked + nbRealFailed;
  }

  bool operator==(const FlakeCounters&) const = default;
};

/// Agreement between two statement selections. An absent value is a
/// metric whose denominator is zero.
struct SelectionMetrics {
  std::optional<double> accuracy;
  std::optional<double> precision;
  std::optional<double> recall;

  bool operator==(const SelectionMetrics&) const = default;
};

/// Describes the first broken invariant, or nullopt when the value is valid.
std::optional<std::string> find_violation(const CoverageMatrix& m);
std::optional<std::string> find_violation(const KillMatrix& m);
std::optional<std::string> find_violation(const FlakinessModel& m);
std::optional<std::string> find_violation(const RepairScenario& s);
std::optional<std::string> find_violation(const SelectionMetrics& s);

/// Throws InvariantError carrying the first violation, if any.
template <typename T>
void validate(const T& value);

}  // namespace flakilab
