#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace flakilab {

/// Population moments and range of a sample.
struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
};

Summary summarize(std::span<const double> values);

/// Linear-interpolation quantile (Hyndman-Fan type 7). Empty input yields nullopt.
std::optional<double> quantile(std::span<const double> values, double q);
std::optional<double> median(std::span<const double> values);

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

std::optional<Quartiles> quartiles(std::span<const double> values);

/// Paired Wilcoxon signed-rank test, two-sided. Zero differences are dropped
/// and tied magnitudes receive mid-ranks. With at most 25 non-zero pairs the
/// p-value comes from the exact permutation distribution of the signed
/// ranks; above that a normal approximation with tie correction is used.
struct WilcoxonResult {
  std::size_t n_nonzero = 0;
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p_value = 1.0;
  bool exact = false;
  /// All differences were zero; the test carries no information.
  bool degenerate = false;
};

inline constexpr std::size_t kWilcoxonExactLimit = 25;

WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y);

}  // namespace flakilab
