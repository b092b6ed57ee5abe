#pragma once

// Spectrum-based fault localization with Ochiai, threshold selection of
// suspicious statements, and robustness of that selection under flakiness.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "flakilab/domain.hpp"

namespace flakilab {

/// Standard: a_ef / sqrt((a_ef + a_nf) * (a_ef + a_ep)) where a_nf counts
/// failing tests that do NOT cover the statement.
/// TotalFailing: the second factor uses a_ef + n_f with n_f the total number
/// of failing tests (a_nf + a_ef), i.e. a_ef / sqrt((2 a_ef + a_nf)(a_ef + a_ep)).
enum class OchiaiMode : std::uint8_t { Standard, TotalFailing };

/// Absent when the denominator is zero.
std::optional<double> ochiai(std::size_t a_ef, std::size_t a_nf, std::size_t a_ep,
                             OchiaiMode mode = OchiaiMode::Standard);

inline constexpr double kDefaultThreshold = 0.1;

struct StatementScore {
  std::optional<double> score;
  bool selected = false;

  bool operator==(const StatementScore&) const = default;
};

struct SuspiciousnessReport {
  std::vector<StatementScore> statements;
  double threshold = kDefaultThreshold;
  std::size_t failing_tests = 0;

  std::vector<std::size_t> selected() const;
  std::size_t selected_count() const noexcept;

  bool operator==(const SuspiciousnessReport&) const = default;
};

/// Scores every statement from its coverage and the run `outcomes`. Flaky
/// failures count as failures: the technique cannot tell them apart.
/// A statement is selected iff it has a score and the score >= threshold.
SuspiciousnessReport localize(const CoverageMatrix& m, std::span<const Outcome> outcomes,
                              double threshold = kDefaultThreshold,
                              OchiaiMode mode = OchiaiMode::Standard);

/// Compares `flaky` against `ground_truth`: accuracy over all statements,
/// precision absent when `flaky` selects nothing, recall absent when the
/// ground truth selects nothing.
SelectionMetrics selection_robustness(const SuspiciousnessReport& ground_truth,
                                      const SuspiciousnessReport& flaky);

/// Mean and median over present values; absent values are only counted.
struct MetricSummary {
  std::size_t present = 0;
  std::size_t missing = 0;
  std::optional<double> mean;
  std::optional<double> median;
};

struct RobustnessPoint {
  double p = 0.0;
  std::vector<SelectionMetrics> replicates;
  MetricSummary accuracy;
  MetricSummary precision;
  MetricSummary recall;
  /// Mean number of selected statements across replicates.
  double mean_selected = 0.0;
};

struct RobustnessOptions {
  double threshold = kDefaultThreshold;
  std::size_t replicates = 100;
  std::uint64_t seed = 0;
  OchiaiMode mode = OchiaiMode::Standard;
  unsigned jobs = 1;
};

/// Ground truth is the selection on the unperturbed baseline. Grid values
/// replace the model probability for every in-scope test; replicate r draws
/// from stream (seed, r) at every grid point. Requires at least one real
/// failing test in the baseline.
std::vector<RobustnessPoint> robustness_sweep(const CoverageMatrix& m,
                                              std::span<const double> grid,
                                              const FlakinessModel& model,
                                              const RobustnessOptions& options);

MetricSummary summarize_metric(std::span<const std::optional<double>> values);

/// 1 - (1 - p)^n: probability that at least one of `n` independently flaky
/// tests fails.
double targeted_flakiness_probability(double p, std::size_t n);

}  // namespace flakilab
