#pragma once

// Abstract generate-and-validate repair campaign over a synthetic program.
//
// The search is reduced to suspiciousness-weighted sampling of ingredient
// statements: there is no crossover or mutation operator. What is kept is
// what flakiness interferes with: the initial fault-localization run that
// decides the ingredients and the tests executed during validation, and the
// validation runs themselves.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flakilab/domain.hpp"
#include "flakilab/fl_lab.hpp"
#include "flakilab/rng.hpp"
#include "flakilab/stats.hpp"

namespace flakilab {

struct SyntheticProgram {
  /// Its baseline marks the real failing tests.
  CoverageMatrix coverage;
  std::vector<std::size_t> buggy_statements;
  /// Probability that an edit of a buggy statement is a correct fix.
  double fix_probability = 1.0;

  std::vector<std::size_t> real_failing_tests() const;

  bool operator==(const SyntheticProgram&) const = default;
};

std::optional<std::string> find_violation(const SyntheticProgram& p);

struct CampaignConfig {
  /// Number of candidate patches evaluated per run.
  std::size_t budget = 400;
  std::size_t population = 40;
  double threshold = kDefaultThreshold;
  bool targeted = false;
  OchiaiMode mode = OchiaiMode::Standard;
};

struct CampaignResult {
  std::size_t valid_patch_count = 0;
  /// Tests failing in the initial run (real and flaky).
  std::size_t failing_test_count = 0;
  /// Passing tests covering at least one ingredient statement.
  std::size_t positive_test_count = 0;
  std::size_t executed_test_count = 0;
  std::size_t generations_used = 0;
  std::size_t evaluated_candidates = 0;
  std::size_t ingredient_count = 0;
  /// Probability that one validation run fails through flakiness alone.
  double validation_flake_probability = 0.0;

  bool operator==(const CampaignResult&) const = default;
};

/// One campaign.
///  1. Initial run: the baseline perturbed by `model` or, when targeted, the
///     clean baseline (fault localization sees only real failing tests).
///  2. Ingredients: statements selected by Ochiai at the threshold. Failing
///     and positive tests are fixed here for the whole run.
///  3. `budget` candidates, each an ingredient drawn with probability
///     proportional to its score; a candidate is a correct fix iff it edits a
///     buggy statement and a Bernoulli(fix_probability) draw succeeds.
///  4. Validation executes the failing and positive tests. Non-targeted: each
///     executed test flakes with its own probability. Targeted: only the real
///     failing test is flaky, with probability 1 - prod(1 - p_t) over the
///     executed tests. Any failure rejects the candidate.
/// An empty ingredient set ends the run with zero candidates.
/// The initial run, the search and the validation draw from three substreams
/// of `rng`, so targeted and non-targeted runs on the same stream share the
/// candidate sequence.
CampaignResult run_campaign(const SyntheticProgram& program, const FlakinessModel& model,
                            const CampaignConfig& config, const RngStream& rng);

struct TargetedComparison {
  std::vector<CampaignResult> targeted;
  std::vector<CampaignResult> non_targeted;
  double targeted_median = 0.0;
  double non_targeted_median = 0.0;
  /// Signed-rank test on (targeted, non-targeted) valid-patch counts.
  WilcoxonResult test;
};

/// Run i of both scenarios uses stream (seed, i).
TargetedComparison compare_targeted(const SyntheticProgram& program, const FlakinessModel& model,
                                    const CampaignConfig& config, std::size_t runs,
                                    std::uint64_t seed, unsigned jobs = 1);

struct FixtureParams {
  std::size_t tests = 100;
  std::size_t statements = 500;
  /// Probability that a test covers a given non-buggy statement.
  double coverage_density = 0.01;
  std::size_t buggy_statements = 1;
  /// Tests covering each buggy statement, real failing tests included.
  std::size_t covering_tests_per_buggy = 5;
  std::size_t failing_tests = 1;
  /// Test classes; the real failing tests belong to the first one.
  std::size_t groups = 10;
  double fix_probability = 0.5;

  bool operator==(const FixtureParams&) const = default;
};

/// Test labels are "pkg.C<g>#test<i>", statements "s<j>".
SyntheticProgram generate_fixture(const FixtureParams& params, std::uint64_t seed);

}  // namespace flakilab
