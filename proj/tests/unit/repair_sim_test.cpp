#include <gtest/gtest.h>

#include <set>

#include "flakilab/error.hpp"
#include "flakilab/repair_sim.hpp"
#include "support/builders.hpp"

using namespace flakilab;
using flakilab::testing::coverage_matrix;

namespace {

SyntheticProgram uniquely_localized() {
  SyntheticProgram p;
  p.coverage = coverage_matrix({{1, 0, 0}, {0, 1, 1}, {0, 1, 0}, {0, 0, 1}}, {0});
  p.buggy_statements = {0};
  p.fix_probability = 1.0;
  return p;
}

std::vector<double> valid_counts(const std::vector<CampaignResult>& runs) {
  std::vector<double> out;
  for (const auto& r : runs) out.push_back(static_cast<double>(r.valid_patch_count));
  return out;
}

}  // namespace

TEST(SyntheticProgram, Validation) {
  auto p = uniquely_localized();
  EXPECT_FALSE(find_violation(p));
  EXPECT_EQ(p.real_failing_tests(), (std::vector<std::size_t>{0}));
  auto bad = p;
  bad.buggy_statements = {1};
  EXPECT_TRUE(find_violation(bad));
  bad = p;
  bad.fix_probability = 0.0;
  EXPECT_TRUE(find_violation(bad));
  bad = p;
  bad.buggy_statements = {7};
  EXPECT_TRUE(find_violation(bad));
}

TEST(RunCampaign, CleanRunOnUniqueStatementFixesEveryCandidate) {
  CampaignConfig config;
  auto r = run_campaign(uniquely_localized(), FlakinessModel::uniform(0.0), config, RngStream(1));
  EXPECT_EQ(r.ingredient_count, 1u);
  EXPECT_EQ(r.evaluated_candidates, config.budget);
  EXPECT_EQ(r.valid_patch_count, config.budget);
  EXPECT_EQ(r.failing_test_count, 1u);
  EXPECT_EQ(r.positive_test_count, 0u);
  EXPECT_EQ(r.generations_used, config.budget / config.population);
  EXPECT_EQ(r, run_campaign(uniquely_localized(), FlakinessModel::uniform(0.0), config,
                            RngStream(1)));
}

TEST(RunCampaign, CertainFlakinessRejectsEverything) {
  auto program = generate_fixture({}, 3);
  CampaignConfig config;
  for (bool targeted : {false, true}) {
    config.targeted = targeted;
    auto r = run_campaign(program, FlakinessModel::uniform(1.0), config, RngStream(2));
    EXPECT_EQ(r.valid_patch_count, 0u);
  }
}

TEST(RunCampaign, BudgetIsConserved) {
  auto program = generate_fixture({}, 5);
  CampaignConfig config;
  config.budget = 123;
  config.population = 10;
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto r = run_campaign(program, FlakinessModel::uniform(0.05), config, RngStream(s));
    if (r.ingredient_count > 0) EXPECT_EQ(r.evaluated_candidates, 123u);
    EXPECT_EQ(r.generations_used, 13u);
    EXPECT_LE(r.positive_test_count, program.coverage.n_tests());
    EXPECT_LE(r.valid_patch_count, r.evaluated_candidates);
  }
}

TEST(RunCampaign, RejectsBadConfig) {
  CampaignConfig config;
  config.population = 0;
  EXPECT_THROW(run_campaign(uniquely_localized(), FlakinessModel::uniform(0.0), config,
                            RngStream(1)),
               InvariantError);
  config.population = 500;
  EXPECT_THROW(run_campaign(uniquely_localized(), FlakinessModel::uniform(0.0), config,
                            RngStream(1)),
               InvariantError);
}

TEST(RunCampaign, FlakinessLowersMedianValidCount) {
  auto program = generate_fixture({}, 11);
  CampaignConfig config;
  std::vector<double> clean, flaky;
  for (std::uint64_t s = 0; s < 10; ++s) {
    clean.push_back(static_cast<double>(
        run_campaign(program, FlakinessModel::uniform(0.0), config, RngStream(s, 0)).valid_patch_count));
    flaky.push_back(static_cast<double>(
        run_campaign(program, FlakinessModel::uniform(0.05), config, RngStream(s, 0)).valid_patch_count));
  }
  EXPECT_LT(*median(flaky), *median(clean));
}

TEST(RunCampaign, ValidCountNonIncreasingInP) {
  auto program = generate_fixture({}, 4);
  CampaignConfig config;
  for (std::uint64_t s = 0; s < 5; ++s) {
    double mean_prev = 1e9;
    for (double p : {0.0, 0.02, 0.05, 0.1, 0.3}) {
      double sum = 0.0;
      for (std::uint64_t r = 0; r < 20; ++r) {
        sum += static_cast<double>(
            run_campaign(program, FlakinessModel::uniform(p), config, RngStream(s * 100 + r))
                .valid_patch_count);
      }
      EXPECT_LE(sum, mean_prev + 1e-9);
      mean_prev = sum;
    }
  }
}

TEST(CompareTargeted, ZeroProbabilityIsDegenerate) {
  auto program = generate_fixture({}, 1);
  auto cmp = compare_targeted(program, FlakinessModel::uniform(0.0), {}, 10, 7);
  EXPECT_EQ(valid_counts(cmp.targeted), valid_counts(cmp.non_targeted));
  EXPECT_TRUE(cmp.test.degenerate);
}

TEST(CompareTargeted, TargetedDominatesAndIsStable) {
  auto program = generate_fixture({}, 2);
  auto cmp = compare_targeted(program, FlakinessModel::uniform(0.05), {}, 10, 3, 2);
  EXPECT_GE(cmp.targeted_median, cmp.non_targeted_median);
  std::set<std::size_t> targeted_exec, plain_exec;
  for (const auto& r : cmp.targeted) targeted_exec.insert(r.executed_test_count);
  for (const auto& r : cmp.non_targeted) plain_exec.insert(r.executed_test_count);
  EXPECT_EQ(targeted_exec.size(), 1u);
  EXPECT_GT(plain_exec.size(), 1u);
  EXPECT_THROW(compare_targeted(program, FlakinessModel::uniform(0.05), {}, 1, 3),
               InvariantError);
}

TEST(CompareTargeted, JobsDoNotChangeResults) {
  auto program = generate_fixture({}, 2);
  auto a = compare_targeted(program, FlakinessModel::uniform(0.05), {}, 6, 3, 1);
  auto b = compare_targeted(program, FlakinessModel::uniform(0.05), {}, 6, 3, 3);
  EXPECT_EQ(a.targeted, b.targeted);
  EXPECT_EQ(a.non_targeted, b.non_targeted);
}

TEST(GenerateFixture, Shape) {
  FixtureParams params;
  params.buggy_statements = 2;
  params.failing_tests = 2;
  auto p = generate_fixture(params, 9);
  EXPECT_FALSE(find_violation(p));
  EXPECT_EQ(p.coverage.n_tests(), 100u);
  EXPECT_EQ(p.coverage.n_statements(), 500u);
  EXPECT_EQ(p.real_failing_tests(), (std::vector<std::size_t>{0, 1}));
  for (std::size_t b : p.buggy_statements) {
    std::size_t covering = 0;
    for (std::size_t t = 0; t < 100; ++t) covering += p.coverage.cover.get(t, b);
    EXPECT_EQ(covering, params.covering_tests_per_buggy);
    EXPECT_TRUE(p.coverage.cover.get(0, b));
    EXPECT_TRUE(p.coverage.cover.get(1, b));
  }
  EXPECT_EQ(p.coverage.tests[0], "pkg.C0#test0");
  EXPECT_EQ(p, generate_fixture(params, 9));
  EXPECT_NE(p, generate_fixture(params, 10));
}
