#pragma once

// Mutation score under flakiness: the exact score, its closed-form
// expectation under independent flips, Monte-Carlo sweeps over the flake
// probability, and score inflation on randomly sampled sub-suites.
//
// The score is the simplified |killed| / |mutants|; equivalent mutants are
// not detected and stay in the denominator.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "flakilab/domain.hpp"
#include "flakilab/stats.hpp"

namespace flakilab {

/// Throws InvariantError when the matrix has no mutants.
double mutation_score(const KillMatrix& m);

struct ScoreMoments {
  double mean = 0.0;
  double std = 0.0;
};

/// Mean and standard deviation of the score after perturb_kill_matrix.
/// Mutant m ends killed with probability
///   q_m = 1 - prod over covered cells (t, m) of P(cell ends not killed),
/// which for PassToFail is 1 - prod(1 - p_t) over in-scope tests that pass on
/// the original program, cover m and do not kill it (and 1 if already killed).
/// Kill events are independent across mutants, so Var = sum q_m (1 - q_m) / |M|^2.
ScoreMoments expected_flaky_score(const KillMatrix& m, const FlakinessModel& model);

/// Per-mutant kill probabilities q_m used by expected_flaky_score.
std::vector<double> kill_probabilities(const KillMatrix& m, std::span<const double> probabilities,
                                       Direction direction);

/// Score as every in-scope flip probability tends to 1 under PassToFail:
/// killed mutants plus survivors covered by at least one in-scope test that
/// passes on the original program.
double saturation_score(const KillMatrix& m, const FlakinessModel& model);

struct SweepPoint {
  double p = 0.0;
  Summary summary;
  std::vector<double> scores;
};

struct SweepOptions {
  std::size_t replicates = 100;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

/// For every grid value p, `replicates` runs of perturb_kill_matrix +
/// mutation_score. Grid values replace the model's probability for all
/// in-scope tests (per-test overrides are ignored). Replicate r draws from
/// stream (seed, r) at every grid point, so per-replicate scores are
/// non-decreasing in p under PassToFail.
std::vector<SweepPoint> score_sweep(const KillMatrix& m, std::span<const double> grid,
                                    const FlakinessModel& model, const SweepOptions& options);

struct SampledSuitesOptions {
  std::size_t suites = 100;
  double min_fraction = 0.10;
  double max_fraction = 0.90;
  double p = 0.05;
  std::size_t replicates = 100;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

struct SuiteDifference {
  std::vector<std::size_t> tests;
  double baseline_score = 0.0;
  /// Flaky score minus baseline score, one per replicate.
  std::vector<double> differences;
  double mean_difference = 0.0;
};

struct SampledSuitesResult {
  std::vector<SuiteDifference> suites;
  /// Quartiles of the per-suite mean differences.
  Quartiles quartiles;
};

/// Samples `suites` sub-suites (size uniform on the fraction range, members
/// uniform without replacement) and measures the score inflation flakiness
/// causes on each. Suite i draws from stream (seed, i).
SampledSuitesResult sampled_suite_differences(const KillMatrix& m, const FlakinessModel& model,
                                              const SampledSuitesOptions& options);

/// Rows `tests` of `m`, in the given order.
KillMatrix select_tests(const KillMatrix& m, std::span<const std::size_t> tests);

}  // namespace flakilab
