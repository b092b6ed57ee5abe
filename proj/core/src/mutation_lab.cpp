#include "flakilab/mutation_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flakilab/error.hpp"
#include "flakilab/flakiness.hpp"
#include "flakilab/parallel.hpp"
#include "flakilab/rng.hpp"

namespace flakilab {

namespace {

void require_mutants(const KillMatrix& m) {
  if (m.n_mutants() == 0) throw InvariantError("mutation score needs at least one mutant");
}

void require_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvariantError("flake probability " + std::to_string(p) + " is outside [0, 1]");
  }
}

FlakinessModel at_probability(const FlakinessModel& model, double p) {
  FlakinessModel out = model;
  out.probability = p;
  out.per_test.clear();
  return out;
}

}  // namespace

double mutation_score(const KillMatrix& m) {
  validate(m);
  require_mutants(m);
  return static_cast<double>(m.killed_count()) / static_cast<double>(m.n_mutants());
}

std::vector<double> kill_probabilities(const KillMatrix& m, std::span<const double> probabilities,
                                       Direction direction) {
  const bool to_fail = direction != Direction::FailToPass;
  const bool to_pass = direction != Direction::PassToFail;
  // survive[k]: probability that every covered cell of mutant k ends not killed.
  std::vector<double> survive(m.n_mutants(), 1.0);
  for (std::size_t t = 0; t < m.n_tests(); ++t) {
    const bool eligible = m.baseline[t] == Outcome::Pass;
    const double p = eligible ? probabilities[t] : 0.0;
    m.cover.for_each_in_row(t, [&](std::size_t k) {
      if (m.kill.get(t, k)) {
        survive[k] *= to_pass ? p : 0.0;
      } else if (to_fail) {
        survive[k] *= 1.0 - p;
      }
    });
  }
  for (double& s : survive) s = 1.0 - s;
  return survive;
}

ScoreMoments expected_flaky_score(const KillMatrix& m, const FlakinessModel& model) {
  validate(m);
  require_mutants(m);
  const auto q = kill_probabilities(m, resolve_probabilities(model, m.tests), model.direction);
  const auto n = static_cast<double>(m.n_mutants());
  double mean = 0.0;
  double var = 0.0;
  for (double qm : q) {
    mean += qm;
    var += qm * (1.0 - qm);
  }
  return {mean / n, std::sqrt(var) / n};
}

double saturation_score(const KillMatrix& m, const FlakinessModel& model) {
  validate(m);
  require_mutants(m);
  const auto probs = resolve_probabilities(at_probability(model, 1.0), m.tests);
  std::size_t reachable = 0;
  for (std::size_t k = 0; k < m.n_mutants(); ++k) {
    bool hit = false;
    for (std::size_t t = 0; t < m.n_tests() && !hit; ++t) {
      hit = m.kill.get(t, k) ||
            (m.cover.get(t, k) && m.baseline[t] == Outcome::Pass && probs[t] > 0.0);
    }
    reachable += hit ? 1 : 0;
  }
  return static_cast<double>(reachable) / static_cast<double>(m.n_mutants());
}

std::vector<SweepPoint> score_sweep(const KillMatrix& m, std::span<const double> grid,
                                    const FlakinessModel& model, const SweepOptions& options) {
  validate(m);
  require_mutants(m);
  for (double p : grid) require_probability(p);

  std::vector<SweepPoint> points(grid.size());
  std::vector<std::vector<double>> probs(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    points[g].p = grid[g];
    points[g].scores.assign(options.replicates, 0.0);
    probs[g] = resolve_probabilities(at_probability(model, grid[g]), m.tests);
  }

  const std::size_t cells = grid.size() * options.replicates;
  parallel_for(cells, options.jobs, [&](std::size_t cell) {
    const std::size_t g = cell / options.replicates;
    const std::size_t r = cell % options.replicates;
    RngStream rng(options.seed, r);
    const KillMatrix flaked = perturb_kill_matrix(m, probs[g], model.direction, rng);
    points[g].scores[r] =
        static_cast<double>(flaked.killed_count()) / static_cast<double>(m.n_mutants());
  });
  for (auto& point : points) point.summary = summarize(point.scores);
  return points;
}

KillMatrix select_tests(const KillMatrix& m, std::span<const std::size_t> tests) {
  KillMatrix out;
  out.mutants = m.mutants;
  out.cover = BitMatrix(tests.size(), m.n_mutants());
  out.kill = BitMatrix(tests.size(), m.n_mutants());
  for (std::size_t i = 0; i < tests.size(); ++i) {
    const std::size_t t = tests[i];
    out.tests.push_back(m.tests[t]);
    out.baseline.push_back(m.baseline[t]);
    m.cover.for_each_in_row(t, [&](std::size_t k) { out.cover.set(i, k); });
    m.kill.for_each_in_row(t, [&](std::size_t k) { out.kill.set(i, k); });
  }
  return out;
}

SampledSuitesResult sampled_suite_differences(const KillMatrix& m, const FlakinessModel& model,
                                              const SampledSuitesOptions& options) {
  validate(m);
  require_mutants(m);
  require_probability(options.p);
  if (!(options.min_fraction > 0.0 && options.min_fraction <= options.max_fraction &&
        options.max_fraction <= 1.0)) {
    throw InvariantError("suite size range must satisfy 0 < min <= max <= 1");
  }
  if (m.n_tests() == 0) throw InvariantError("cannot sample suites from an empty test suite");

  const auto probs = resolve_probabilities(at_probability(model, options.p), m.tests);
  const std::size_t n = m.n_tests();
  const auto lo = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(options.min_fraction * static_cast<double>(n) - 1e-9)));
  const auto hi = std::max<std::size_t>(
      lo, static_cast<std::size_t>(std::floor(options.max_fraction * static_cast<double>(n) + 1e-9)));

  SampledSuitesResult result;
  result.suites.resize(options.suites);
  parallel_for(options.suites, options.jobs, [&](std::size_t i) {
    RngStream rng(options.seed, i);
    const std::size_t size = lo + static_cast<std::size_t>(rng.below(hi - lo + 1));

    // Partial Fisher-Yates: the first `size` entries are a uniform sample.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t j = 0; j < size; ++j) {
      const std::size_t pick = j + static_cast<std::size_t>(rng.below(n - j));
      std::swap(order[j], order[pick]);
    }
    order.resize(size);
    std::sort(order.begin(), order.end());

    SuiteDifference& suite = result.suites[i];
    const KillMatrix sub = select_tests(m, order);
    std::vector<double> sub_probs;
    for (std::size_t t : order) sub_probs.push_back(probs[t]);
    suite.tests = std::move(order);
    suite.baseline_score =
        static_cast<double>(sub.killed_count()) / static_cast<double>(sub.n_mutants());
    suite.differences.reserve(options.replicates);
    for (std::size_t r = 0; r < options.replicates; ++r) {
      RngStream rep = rng.substream(r);
      const KillMatrix flaked = perturb_kill_matrix(sub, sub_probs, model.direction, rep);
      const double score =
          static_cast<double>(flaked.killed_count()) / static_cast<double>(sub.n_mutants());
      suite.differences.push_back(score - suite.baseline_score);
    }
    suite.mean_difference = summarize(suite.differences).mean;
  });

  std::vector<double> means;
  for (const auto& s : result.suites) means.push_back(s.mean_difference);
  if (auto q = quartiles(means)) result.quartiles = *q;
  return result;
}

}  // namespace flakilab
