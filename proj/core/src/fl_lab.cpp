#include "flakilab/fl_lab.hpp"

#include <algorithm>
#include <cmath>

#include "flakilab/error.hpp"
#include "flakilab/flakiness.hpp"
#include "flakilab/parallel.hpp"
#include "flakilab/repair_analytic.hpp"
#include "flakilab/rng.hpp"
#include "flakilab/stats.hpp"

namespace flakilab {

std::optional<double> ochiai(std::size_t a_ef, std::size_t a_nf, std::size_t a_ep,
                             OchiaiMode mode) {
  const std::size_t failing = mode == OchiaiMode::Standard ? a_ef + a_nf : 2 * a_ef + a_nf;
  const std::size_t executed = a_ef + a_ep;
  if (failing == 0 || executed == 0) return std::nullopt;
  const double score = static_cast<double>(a_ef) /
                       std::sqrt(static_cast<double>(failing) * static_cast<double>(executed));
  return std::min(score, 1.0);
}

std::vector<std::size_t> SuspiciousnessReport::selected() const {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < statements.size(); ++s) {
    if (statements[s].selected) out.push_back(s);
  }
  return out;
}

std::size_t SuspiciousnessReport::selected_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(statements.begin(), statements.end(),
                                                [](const StatementScore& s) { return s.selected; }));
}

SuspiciousnessReport localize(const CoverageMatrix& m, std::span<const Outcome> outcomes,
                              double threshold, OchiaiMode mode) {
  validate(m);
  if (outcomes.size() != m.n_tests()) {
    throw InvariantError("localization needs " + std::to_string(m.n_tests()) +
                         " outcomes, got " + std::to_string(outcomes.size()));
  }
  std::vector<std::size_t> ef(m.n_statements(), 0);
  std::vector<std::size_t> ep(m.n_statements(), 0);
  std::size_t failing = 0;
  for (std::size_t t = 0; t < m.n_tests(); ++t) {
    const bool fails = is_failing(outcomes[t]);
    failing += fails ? 1 : 0;
    auto& counts = fails ? ef : ep;
    m.cover.for_each_in_row(t, [&](std::size_t s) { ++counts[s]; });
  }

  SuspiciousnessReport report;
  report.threshold = threshold;
  report.failing_tests = failing;
  report.statements.resize(m.n_statements());
  for (std::size_t s = 0; s < m.n_statements(); ++s) {
    auto& st = report.statements[s];
    st.score = ochiai(ef[s], failing - ef[s], ep[s], mode);
    st.selected = st.score && *st.score >= threshold;
  }
  return report;
}

SelectionMetrics selection_robustness(const SuspiciousnessReport& ground_truth,
                                      const SuspiciousnessReport& flaky) {
  if (ground_truth.statements.size() != flaky.statements.size()) {
    throw InvariantError("selections cover different statement universes");
  }
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t s = 0; s < flaky.statements.size(); ++s) {
    const bool truth = ground_truth.statements[s].selected;
    const bool got = flaky.statements[s].selected;
    if (truth && got) ++tp;
    else if (!truth && got) ++fp;
    else if (!truth && !got) ++tn;
    else ++fn;
  }
  SelectionMetrics metrics;
  const std::size_t total = tp + fp + tn + fn;
  if (total > 0) metrics.accuracy = static_cast<double>(tp + tn) / static_cast<double>(total);
  if (tp + fp > 0) metrics.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) metrics.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return metrics;
}

MetricSummary summarize_metric(std::span<const std::optional<double>> values) {
  MetricSummary s;
  std::vector<double> present;
  for (const auto& v : values) {
    if (v) present.push_back(*v);
  }
  s.present = present.size();
  s.missing = values.size() - present.size();
  if (!present.empty()) {
    s.mean = summarize(present).mean;
    s.median = median(present);
  }
  return s;
}

std::vector<RobustnessPoint> robustness_sweep(const CoverageMatrix& m,
                                              std::span<const double> grid,
                                              const FlakinessModel& model,
                                              const RobustnessOptions& options) {
  validate(m);
  if (std::none_of(m.baseline.begin(), m.baseline.end(),
                   [](Outcome o) { return o == Outcome::Fail; })) {
    throw InvariantError("robustness sweep needs at least one real failing test");
  }
  const auto truth = localize(m, m.baseline, options.threshold, options.mode);

  std::vector<RobustnessPoint> points(grid.size());
  std::vector<std::vector<double>> probs(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    FlakinessModel at = model;
    at.probability = grid[g];
    at.per_test.clear();
    probs[g] = resolve_probabilities(at, m.tests);
    points[g].p = grid[g];
    points[g].replicates.resize(options.replicates);
  }

  std::vector<std::size_t> selected_counts(grid.size() * options.replicates, 0);
  parallel_for(grid.size() * options.replicates, options.jobs, [&](std::size_t cell) {
    const std::size_t g = cell / options.replicates;
    const std::size_t r = cell % options.replicates;
    RngStream rng(options.seed, r);
    IndependentFlakes process(probs[g]);
    const auto run = perturb_outcomes(m.baseline, process, model.direction, rng);
    const auto flaky = localize(m, run.outcomes, options.threshold, options.mode);
    points[g].replicates[r] = selection_robustness(truth, flaky);
    selected_counts[cell] = flaky.selected_count();
  });

  for (std::size_t g = 0; g < grid.size(); ++g) {
    auto& point = points[g];
    std::vector<std::optional<double>> acc, prec, rec;
    for (const auto& metrics : point.replicates) {
      acc.push_back(metrics.accuracy);
      prec.push_back(metrics.precision);
      rec.push_back(metrics.recall);
    }
    point.accuracy = summarize_metric(acc);
    point.precision = summarize_metric(prec);
    point.recall = summarize_metric(rec);
    double total = 0.0;
    for (std::size_t r = 0; r < options.replicates; ++r) {
      total += static_cast<double>(selected_counts[g * options.replicates + r]);
    }
    point.mean_selected = options.replicates ? total / static_cast<double>(options.replicates) : 0.0;
  }
  return points;
}

double targeted_flakiness_probability(double p, std::size_t n) {
  return patch_invalidation_prob(p, n);
}

}  // namespace flakilab
