#pragma once

// Injection of laboratory-controlled flakiness into recorded executions.
//
// Flips are applied after a test has run, so a flaky outcome never changes
// what the test covered. Every function draws its random numbers in a fixed
// order that does not depend on the probabilities, so two calls on the same
// input with the same stream are coupled: raising a probability can only add
// flips.

#include <cstddef>
#include <span>
#include <vector>

#include "flakilab/domain.hpp"
#include "flakilab/rng.hpp"

namespace flakilab {

/// Source of per-execution flip probabilities. Implementations may depend
/// on the history of the current run; the shipped one is independent.
class FlakeProcess {
 public:
  virtual ~FlakeProcess() = default;

  /// Probability that test `test` flips, given `flaked_so_far` earlier flips
  /// in the same run.
  virtual double flip_probability(std::size_t test, std::size_t flaked_so_far) const = 0;
};

/// Independent flips with a fixed probability per test.
class IndependentFlakes final : public FlakeProcess {
 public:
  explicit IndependentFlakes(std::vector<double> probabilities)
      : probabilities_(std::move(probabilities)) {}

  double flip_probability(std::size_t test, std::size_t) const override {
    return probabilities_[test];
  }

  std::span<const double> probabilities() const noexcept { return probabilities_; }

 private:
  std::vector<double> probabilities_;
};

struct PerturbedOutcomes {
  std::vector<Outcome> outcomes;
  FlakeCounters counters;
};

FlakeCounters count_outcomes(std::span<const Outcome> outcomes) noexcept;

/// One uniform draw per test, in test order. A passing test becomes
/// FlakyFail (PassToFail or Both) and a failing one FlakyPass (FailToPass or
/// Both) when its draw falls below the flip probability. Outcomes that are
/// already flaky are left alone.
PerturbedOutcomes perturb_outcomes(std::span<const Outcome> baseline,
                                   const FlakeProcess& process, Direction direction,
                                   RngStream& rng);

/// Resolves `model` against `tests` (see resolve_probabilities) first.
PerturbedOutcomes perturb_outcomes(std::span<const Outcome> baseline,
                                   std::span<const std::string> tests,
                                   std::span<const std::string> groups,
                                   const FlakinessModel& model, RngStream& rng);

/// Flakes the mutant runs of a kill matrix. Each covered cell of a test that
/// passes on the original program is a separate execution: a covered
/// survivor becomes a kill with the test's probability under PassToFail, a
/// kill reverts to survival under FailToPass. Uncovered cells and tests
/// failing on the original program never change; `cover` is untouched.
KillMatrix perturb_kill_matrix(const KillMatrix& m, std::span<const double> probabilities,
                               Direction direction, RngStream& rng);

KillMatrix perturb_kill_matrix(const KillMatrix& m, const FlakinessModel& model,
                               RngStream& rng);

/// Flakes the outcome vector of the fault-localization run.
PerturbedOutcomes perturb_fl_run(const CoverageMatrix& m, const FlakinessModel& model,
                                 RngStream& rng);

}  // namespace flakilab
