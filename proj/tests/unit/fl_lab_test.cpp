#include <gtest/gtest.h>

#include <cmath>

#include "flakilab/error.hpp"
#include "flakilab/fl_lab.hpp"
#include "flakilab/rng.hpp"
#include "support/builders.hpp"

using namespace flakilab;
using flakilab::testing::coverage_matrix;

TEST(Ochiai, Examples) {
  EXPECT_DOUBLE_EQ(*ochiai(0, 1, 3), 0.0);
  EXPECT_DOUBLE_EQ(*ochiai(1, 0, 0), 1.0);
  EXPECT_NEAR(*ochiai(2, 1, 2), 2.0 / std::sqrt(12.0), 1e-15);
  EXPECT_NEAR(*ochiai(2, 1, 2), 0.5774, 1e-4);
  EXPECT_FALSE(ochiai(0, 0, 3));
  EXPECT_FALSE(ochiai(0, 2, 0));
}

TEST(Ochiai, TotalFailingMode) {
  EXPECT_NEAR(*ochiai(1, 0, 0, OchiaiMode::TotalFailing), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(*ochiai(2, 1, 2, OchiaiMode::TotalFailing), 2.0 / std::sqrt(20.0), 1e-15);
}

// Three tests: t0 and t1 fail, t2 passes. s0 is covered by t0, t1, t2.
TEST(Ochiai, BruteForceConfusionCountsOnThreeTests) {
  auto m = coverage_matrix({{1, 1, 0}, {1, 0, 1}, {1, 1, 1}}, {0, 1});
  auto r = localize(m, m.baseline);
  for (std::size_t s = 0; s < 3; ++s) {
    std::size_t ef = 0, nf = 0, ep = 0;
    for (std::size_t t = 0; t < 3; ++t) {
      const bool fail = is_failing(m.baseline[t]);
      const bool cov = m.cover.get(t, s);
      ef += fail && cov;
      nf += fail && !cov;
      ep += !fail && cov;
    }
    const double expected = ef / std::sqrt(double((ef + nf) * (ef + ep)));
    EXPECT_NEAR(*r.statements[s].score, expected, 1e-15);
  }
  EXPECT_NEAR(*r.statements[0].score, 2.0 / std::sqrt(6.0), 1e-15);
}

TEST(Localize, SingleFailingTestPinpointsStatement) {
  auto m = coverage_matrix({{0, 1, 0}, {1, 0, 1}, {1, 0, 0}}, {0});
  auto r = localize(m, m.baseline);
  EXPECT_DOUBLE_EQ(*r.statements[1].score, 1.0);
  EXPECT_DOUBLE_EQ(*r.statements[0].score, 0.0);
  EXPECT_DOUBLE_EQ(*r.statements[2].score, 0.0);
  EXPECT_EQ(r.selected(), (std::vector<std::size_t>{1}));
  EXPECT_EQ(r.failing_tests, 1u);
}

TEST(Localize, NoFailingTests) {
  auto m = coverage_matrix({{1, 0}, {1, 0}});
  auto r = localize(m, m.baseline);
  EXPECT_EQ(r.selected_count(), 0u);
  for (const auto& s : r.statements) EXPECT_TRUE(!s.score || *s.score == 0.0);
}

TEST(Localize, UncoveredStatementsNeverSelected) {
  auto m = coverage_matrix({{1, 0}, {1, 0}}, {0});
  std::vector<Outcome> all_fail(2, Outcome::FlakyFail);
  auto r = localize(m, all_fail, 0.0);
  EXPECT_FALSE(r.statements[1].selected);
}

TEST(Localize, ThresholdMonotone) {
  auto m = coverage_matrix({{1, 1, 0, 1}, {0, 1, 1, 1}, {1, 0, 1, 1}, {0, 0, 1, 0}}, {0});
  std::size_t last = m.n_statements() + 1;
  for (double th : {0.0, 0.1, 0.3, 0.5, 0.7, 1.0}) {
    auto r = localize(m, m.baseline, th);
    EXPECT_LE(r.selected_count(), last);
    last = r.selected_count();
  }
}

TEST(Localize, DimensionMismatch) {
  auto m = coverage_matrix({{1}});
  std::vector<Outcome> wrong(2, Outcome::Pass);
  EXPECT_THROW(localize(m, wrong), InvariantError);
}

// Flaky failures increase the failing count, and statements covered only by
// the real failure lose suspiciousness.
TEST(Localize, FlakyFailuresDiluteRealFailureStatements) {
  auto m = coverage_matrix({{1, 1, 0, 0, 0},
                            {0, 1, 1, 0, 0},
                            {0, 0, 1, 1, 0},
                            {0, 0, 0, 1, 1},
                            {1, 0, 0, 0, 1}},
                           {0});
  auto clean = localize(m, m.baseline);
  RngStream rng(4);
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    std::vector<Outcome> run = m.baseline;
    for (std::size_t t = 1; t < 5; ++t) {
      if (rng.bernoulli(0.4)) run[t] = Outcome::FlakyFail;
    }
    auto flaky = localize(m, run);
    EXPECT_GE(flaky.failing_tests, clean.failing_tests);
    for (std::size_t s = 0; s < 5; ++s) {
      bool only_real = true;
      for (std::size_t t = 1; t < 5; ++t) only_real = only_real && !m.cover.get(t, s);
      if (only_real && m.cover.get(0, s)) {
        EXPECT_LE(*flaky.statements[s].score, *clean.statements[s].score + 1e-15);
      }
    }
  }
}

namespace {

SuspiciousnessReport selection(std::vector<bool> selected) {
  SuspiciousnessReport r;
  for (bool s : selected) r.statements.push_back({s ? 1.0 : 0.0, s});
  return r;
}

}  // namespace

TEST(SelectionRobustness, Examples) {
  auto gt = selection({true, true, false, false, false});
  EXPECT_EQ(selection_robustness(gt, gt), (SelectionMetrics{1.0, 1.0, 1.0}));

  auto m = selection_robustness(gt, selection({false, true, true, false, false}));
  EXPECT_DOUBLE_EQ(*m.accuracy, 0.6);
  EXPECT_DOUBLE_EQ(*m.precision, 0.5);
  EXPECT_DOUBLE_EQ(*m.recall, 0.5);

  auto none = selection_robustness(gt, selection({false, false, false, false, false}));
  EXPECT_DOUBLE_EQ(*none.recall, 0.0);
  EXPECT_FALSE(none.precision);
  EXPECT_DOUBLE_EQ(*none.accuracy, 0.6);

  EXPECT_THROW(selection_robustness(gt, selection({true})), InvariantError);
}

TEST(SummarizeMetric, CountsMissing) {
  std::vector<std::optional<double>> v{0.5, std::nullopt, 1.0, 0.0};
  auto s = summarize_metric(v);
  EXPECT_EQ(s.present, 3u);
  EXPECT_EQ(s.missing, 1u);
  EXPECT_DOUBLE_EQ(*s.mean, 0.5);
  EXPECT_DOUBLE_EQ(*s.median, 0.5);
  std::vector<std::optional<double>> empty{std::nullopt};
  EXPECT_FALSE(summarize_metric(empty).mean);
}

TEST(RobustnessSweep, ZeroPointIsPerfect) {
  auto m = coverage_matrix({{1, 1, 0}, {0, 1, 1}, {1, 0, 1}, {0, 0, 1}}, {0});
  std::vector<double> grid{0.0, 0.2};
  RobustnessOptions o;
  o.replicates = 30;
  auto sweep = robustness_sweep(m, grid, FlakinessModel::uniform(0.0), o);
  for (const auto& r : sweep[0].replicates) EXPECT_EQ(r, (SelectionMetrics{1.0, 1.0, 1.0}));
  EXPECT_EQ(sweep[1].replicates.size(), 30u);
}

TEST(RobustnessSweep, NeedsARealFailure) {
  auto m = coverage_matrix({{1}});
  std::vector<double> grid{0.1};
  EXPECT_THROW(robustness_sweep(m, grid, FlakinessModel::uniform(0.0), {}), InvariantError);
}

TEST(TargetedProbability, Examples) {
  EXPECT_DOUBLE_EQ(targeted_flakiness_probability(0.05, 0), 0.0);
  EXPECT_NEAR(targeted_flakiness_probability(0.05, 1), 0.05, 1e-15);
  EXPECT_NEAR(targeted_flakiness_probability(0.05, 20), 1.0 - std::pow(0.95, 20), 1e-14);
  EXPECT_NEAR(targeted_flakiness_probability(0.05, 20), 0.6415, 1e-4);
}

TEST(TargetedProbability, MatchesUnionFrequency) {
  RngStream rng(12);
  constexpr int R = 20000;
  int hits = 0;
  for (int r = 0; r < R; ++r) {
    bool any = false;
    for (int t = 0; t < 20; ++t) any = rng.bernoulli(0.05) || any;
    hits += any;
  }
  const double p = targeted_flakiness_probability(0.05, 20);
  EXPECT_NEAR(hits / double(R), p, 4.0 * std::sqrt(p * (1 - p) / R));
}
