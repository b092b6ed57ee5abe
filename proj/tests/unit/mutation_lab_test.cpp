#include <gtest/gtest.h>

#include <cmath>

#include "flakilab/error.hpp"
#include "flakilab/flakiness.hpp"
#include "flakilab/mutation_lab.hpp"
#include "support/builders.hpp"

using namespace flakilab;
using flakilab::testing::kill_matrix;
using flakilab::testing::random_kill_matrix;

TEST(MutationScore, Definition) {
  std::vector<std::vector<int>> row(1, std::vector<int>(10, 1));
  for (int i = 0; i < 5; ++i) row[0][i] = 2;
  EXPECT_DOUBLE_EQ(mutation_score(kill_matrix(row)), 0.5);
  EXPECT_DOUBLE_EQ(mutation_score(kill_matrix({{1, 0, 1}})), 0.0);
  EXPECT_DOUBLE_EQ(mutation_score(kill_matrix({{2, 2}, {0, 2}})), 1.0);
  EXPECT_THROW(mutation_score(KillMatrix{}), InvariantError);
}

TEST(ExpectedScore, ZeroProbability) {
  auto m = kill_matrix({{2, 1, 0}, {1, 1, 1}});
  auto e = expected_flaky_score(m, FlakinessModel::uniform(0.0));
  EXPECT_DOUBLE_EQ(e.mean, mutation_score(m));
  EXPECT_DOUBLE_EQ(e.std, 0.0);
}

TEST(ExpectedScore, TwoMutantFixture) {
  auto m = kill_matrix({{2, 0}, {0, 1}});
  auto e = expected_flaky_score(m, FlakinessModel::uniform(0.5));
  EXPECT_DOUBLE_EQ(e.mean, 0.75);
  EXPECT_DOUBLE_EQ(e.std, 0.25);
}

// Exhaustive enumeration over every flip pattern of the flippable cells.
TEST(ExpectedScore, MatchesEnumerationWithHeterogeneousProbabilities) {
  auto m = kill_matrix({{1, 2, 1, 0}, {1, 0, 1, 1}, {0, 1, 1, 1}, {1, 1, 0, 1}}, {3});
  std::vector<double> probs{0.1, 0.35, 0.6, 0.9};

  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t t = 0; t < m.n_tests(); ++t) {
    if (m.baseline[t] != Outcome::Pass) continue;
    for (std::size_t k = 0; k < m.n_mutants(); ++k) {
      if (m.cover.get(t, k) && !m.kill.get(t, k)) cells.emplace_back(t, k);
    }
  }
  double mean = 0.0;
  double second = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << cells.size()); ++mask) {
    double weight = 1.0;
    std::vector<bool> killed(m.n_mutants());
    for (std::size_t k = 0; k < m.n_mutants(); ++k) killed[k] = m.is_killed(k);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const double p = probs[cells[i].first];
      if (mask >> i & 1U) {
        weight *= p;
        killed[cells[i].second] = true;
      } else {
        weight *= 1.0 - p;
      }
    }
    double score = 0.0;
    for (bool k : killed) score += k ? 1.0 : 0.0;
    score /= static_cast<double>(m.n_mutants());
    mean += weight * score;
    second += weight * score * score;
  }

  auto q = kill_probabilities(m, probs, Direction::PassToFail);
  double closed_mean = 0.0;
  double closed_var = 0.0;
  for (double v : q) {
    closed_mean += v;
    closed_var += v * (1.0 - v);
  }
  const double n = static_cast<double>(m.n_mutants());
  EXPECT_NEAR(closed_mean / n, mean, 1e-12);
  EXPECT_NEAR(std::sqrt(closed_var) / n, std::sqrt(second - mean * mean), 1e-12);
}

TEST(ExpectedScore, AgreesWithMonteCarlo) {
  RngStream gen(11);
  for (int instance = 0; instance < 3; ++instance) {
    auto m = random_kill_matrix(20, 50, 0.3, 0.2, gen);
    auto model = FlakinessModel::uniform(0.05);
    auto e = expected_flaky_score(m, model);
    constexpr std::size_t R = 10000;
    double sum = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      RngStream rng(instance, r);
      sum += mutation_score(perturb_kill_matrix(m, model, rng));
    }
    EXPECT_NEAR(sum / R, e.mean, 4.0 * e.std / std::sqrt(double(R)));
  }
}

TEST(ExpectedScore, ConcaveNonDecreasingInP) {
  RngStream gen(5);
  auto m = random_kill_matrix(30, 80, 0.2, 0.3, gen);
  std::vector<double> means;
  for (int i = 0; i <= 50; ++i) {
    means.push_back(expected_flaky_score(m, FlakinessModel::uniform(i / 100.0)).mean);
  }
  for (std::size_t i = 1; i < means.size(); ++i) EXPECT_GE(means[i], means[i - 1]);
  for (std::size_t i = 1; i + 1 < means.size(); ++i) {
    EXPECT_LE(means[i + 1] - means[i], means[i] - means[i - 1] + 1e-12);
  }
}

TEST(ScoreSweep, ZeroPointHasNoSpread) {
  auto m = kill_matrix({{2, 1, 1}, {1, 1, 0}});
  std::vector<double> grid{0.0, 0.3};
  auto sweep = score_sweep(m, grid, FlakinessModel::uniform(0.0), {50, 9, 1});
  ASSERT_EQ(sweep.size(), 2u);
  EXPECT_DOUBLE_EQ(sweep[0].summary.std, 0.0);
  EXPECT_DOUBLE_EQ(sweep[0].summary.mean, mutation_score(m));
  EXPECT_LE(sweep[1].summary.min, sweep[1].summary.mean);
  EXPECT_LE(sweep[1].summary.mean, sweep[1].summary.max);
}

TEST(ScoreSweep, PerReplicateMonotoneAndSaturates) {
  RngStream gen(21);
  auto m = random_kill_matrix(15, 40, 0.15, 0.3, gen);
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  auto model = FlakinessModel::uniform(0.0);
  auto sweep = score_sweep(m, grid, model, {40, 3, 2});
  for (std::size_t g = 1; g < sweep.size(); ++g) {
    for (std::size_t r = 0; r < 40; ++r) {
      EXPECT_GE(sweep[g].scores[r], sweep[g - 1].scores[r]);
    }
  }
  EXPECT_DOUBLE_EQ(sweep.back().summary.mean, saturation_score(m, model));
  EXPECT_DOUBLE_EQ(sweep.back().summary.std, 0.0);
}

TEST(ScoreSweep, JobsDoNotChangeResults) {
  RngStream gen(2);
  auto m = random_kill_matrix(10, 20, 0.3, 0.3, gen);
  std::vector<double> grid{0.05, 0.2};
  auto a = score_sweep(m, grid, FlakinessModel::uniform(0.0), {30, 4, 1});
  auto b = score_sweep(m, grid, FlakinessModel::uniform(0.0), {30, 4, 4});
  for (std::size_t g = 0; g < grid.size(); ++g) EXPECT_EQ(a[g].scores, b[g].scores);
}

TEST(Saturation, CountsCoveredSurvivorsOfPassingInScopeTests) {
  auto m = kill_matrix({{2, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}, {2});
  EXPECT_DOUBLE_EQ(saturation_score(m, FlakinessModel::uniform(0.1)), 0.75);
  auto scoped = FlakinessModel::uniform(0.1);
  scoped.scope = Scope::tests({"t0"});
  EXPECT_DOUBLE_EQ(saturation_score(m, scoped), 0.5);
}

TEST(SampledSuites, ZeroProbabilityHasNoDifference) {
  RngStream gen(8);
  auto m = random_kill_matrix(20, 30, 0.3, 0.3, gen);
  SampledSuitesOptions o;
  o.suites = 10;
  o.replicates = 5;
  o.p = 0.0;
  auto r = sampled_suite_differences(m, FlakinessModel::uniform(0.0), o);
  ASSERT_EQ(r.suites.size(), 10u);
  for (const auto& s : r.suites) {
    for (double d : s.differences) EXPECT_EQ(d, 0.0);
  }
}

TEST(SampledSuites, DifferencesAreNonNegativeAndSizesInRange) {
  RngStream gen(8);
  auto m = random_kill_matrix(40, 30, 0.3, 0.3, gen);
  SampledSuitesOptions o;
  o.suites = 20;
  o.replicates = 10;
  o.p = 0.1;
  o.seed = 5;
  auto r = sampled_suite_differences(m, FlakinessModel::uniform(0.0), o);
  for (const auto& s : r.suites) {
    EXPECT_GE(s.tests.size(), 4u);
    EXPECT_LE(s.tests.size(), 36u);
    for (double d : s.differences) EXPECT_GE(d, 0.0);
  }
  EXPECT_LE(r.quartiles.q1, r.quartiles.median);
  EXPECT_LE(r.quartiles.median, r.quartiles.q3);
}

TEST(SelectTests, KeepsRowsInOrder) {
  auto m = kill_matrix({{2, 1}, {0, 1}, {1, 0}});
  std::vector<std::size_t> rows{2, 0};
  auto s = select_tests(m, rows);
  EXPECT_EQ(s.tests, (std::vector<std::string>{"t2", "t0"}));
  EXPECT_TRUE(s.kill.get(1, 0));
  EXPECT_FALSE(s.kill.get(0, 0));
}
