#pragma once

// Closed-form survival of repair patches under independent, identically
// distributed flaky failures of their covering tests.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <span>
#include <vector>

#include "flakilab/domain.hpp"

namespace flakilab {

/// Probability that a valid patch covered by `covering_tests` tests is
/// rejected because at least one of them flakes: 1 - (1 - p)^k.
double patch_invalidation_prob(double p, std::size_t covering_tests);

/// (1 - p)^k, evaluated as exp(k * log1p(-p)).
double patch_survival_prob(double p, std::size_t covering_tests);

/// Expected number of `patches` that are still labelled valid.
double expected_surviving(std::span<const PatchRecord> patches, double p);

/// Probability that at least one of `patches` is still labelled valid,
/// 1 - prod of invalidation probabilities. Zero for an empty set.
double prob_at_least_one(std::span<const PatchRecord> patches, double p);

struct PatchSurvival {
  std::string id;
  std::size_t covering_tests = 0;
  double invalidation = 0.0;
};

struct AnalyticRepairReport {
  double p = 0.0;
  std::size_t valid_count = 0;
  std::size_t genuine_count = 0;
  /// Average number of tests covering a valid patch.
  double covering_per_patch = 0.0;
  double expected_valid = 0.0;
  double expected_genuine = 0.0;
  double p_at_least_one_valid = 0.0;
  double p_at_least_one_genuine = 0.0;
  std::vector<PatchSurvival> valid_patches;
};

AnalyticRepairReport analyze_repair(const RepairScenario& scenario, double p);

struct MonteCarloRepair {
  std::size_t replicates = 0;
  double mean_surviving = 0.0;
  double std_surviving = 0.0;
  double standard_error = 0.0;
  double p_at_least_one = 0.0;
  /// histogram[n]: replicates in which exactly n patches survived.
  std::vector<std::size_t> histogram;
};

/// Simulates validation of `patches`: each replicate executes every covering
/// test of every patch once, and a patch survives when none of them flakes.
/// Replicate r draws from stream (seed, r).
MonteCarloRepair monte_carlo_repair(std::span<const PatchRecord> patches, double p,
                                    std::size_t replicates, std::uint64_t seed,
                                    unsigned jobs = 1);

struct GenuineAdvantage {
  double p_genuine = 0.0;
  /// E(|V_f|) / |V|.
  double mean_valid_survival = 0.0;
  /// p_genuine / mean_valid_survival; absent when no valid patch can survive.
  std::optional<double> ratio;
  /// ratio - 1.
  std::optional<double> relative_difference;
};

/// Requires at least one valid and one genuine patch.
GenuineAdvantage genuine_advantage(const RepairScenario& scenario, double p);

}  // namespace flakilab
