#include "flakilab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flakilab/error.hpp"

namespace flakilab {

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  if (s.min == s.max) {
    s.mean = s.min;
    return s;
  }
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.count);
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(s.count));
  // Rounding in the mean can put it a few ulps outside a constant sample.
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

std::optional<double> quantile(std::span<const double> values, double q) {
  if (values.empty()) return std::nullopt;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::optional<double> median(std::span<const double> values) { return quantile(values, 0.5); }

std::optional<Quartiles> quartiles(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  return Quartiles{*quantile(values, 0.25), *quantile(values, 0.5), *quantile(values, 0.75)};
}

namespace {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw InvariantError("Wilcoxon signed-rank test needs paired samples of equal length");
  }
  struct Diff {
    double magnitude;
    bool positive;
  };
  std::vector<Diff> diffs;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    if (d != 0.0) diffs.push_back({std::abs(d), d > 0.0});
  }

  WilcoxonResult r;
  r.n_nonzero = diffs.size();
  if (diffs.empty()) {
    r.degenerate = true;
    return r;
  }
  std::sort(diffs.begin(), diffs.end(),
            [](const Diff& a, const Diff& b) { return a.magnitude < b.magnitude; });

  // Doubled mid-ranks keep tied ranks integral.
  const std::size_t n = diffs.size();
  std::vector<std::size_t> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && diffs[j + 1].magnitude == diffs[i].magnitude) ++j;
    const std::size_t shared = (i + 1) + (j + 1);
    for (std::size_t k = i; k <= j; ++k) rank2[k] = shared;
    const auto t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }

  std::size_t w_plus2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (diffs[i].positive) w_plus2 += rank2[i];
  }
  const std::size_t total2 = n * (n + 1);
  r.w_plus = static_cast<double>(w_plus2) / 2.0;
  r.w_minus = static_cast<double>(total2 - w_plus2) / 2.0;

  if (n <= kWilcoxonExactLimit) {
    r.exact = true;
    // counts[s]: number of sign assignments whose doubled positive rank sum is s.
    std::vector<double> counts(total2 + 1, 0.0);
    counts[0] = 1.0;
    std::size_t reach = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t s = reach + 1; s-- > 0;) {
        if (counts[s] != 0.0) counts[s + rank2[i]] += counts[s];
      }
      reach += rank2[i];
    }
    const double all = std::ldexp(1.0, static_cast<int>(n));
    double lower = 0.0;
    double upper = 0.0;
    for (std::size_t s = 0; s <= total2; ++s) {
      if (s <= w_plus2) lower += counts[s];
      if (s >= w_plus2) upper += counts[s];
    }
    r.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / all);
    return r;
  }

  const auto nd = static_cast<double>(n);
  const double mean = nd * (nd + 1.0) / 4.0;
  const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
  if (var <= 0.0) {
    r.p_value = 1.0;
    return r;
  }
  const double z = (r.w_plus - mean) / std::sqrt(var);
  r.p_value = std::min(1.0, 2.0 * normal_sf(std::abs(z)));
  return r;
}

}  // namespace flakilab
