#include "flakilab/repair_sim.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "flakilab/error.hpp"
#include "flakilab/flakiness.hpp"
#include "flakilab/parallel.hpp"

namespace flakilab {

std::vector<std::size_t> SyntheticProgram::real_failing_tests() const {
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < coverage.baseline.size(); ++t) {
    if (coverage.baseline[t] == Outcome::Fail) out.push_back(t);
  }
  return out;
}

std::optional<std::string> find_violation(const SyntheticProgram& p) {
  if (auto e = find_violation(p.coverage)) return e;
  if (!(p.fix_probability > 0.0 && p.fix_probability <= 1.0)) {
    return "fix probability must lie in (0, 1]";
  }
  std::set<std::size_t> buggy;
  for (std::size_t s : p.buggy_statements) {
    if (s >= p.coverage.n_statements()) return "buggy statement index out of range";
    if (!buggy.insert(s).second) return "duplicate buggy statement";
  }
  const auto failing = p.real_failing_tests();
  if (failing.empty()) return "a synthetic program needs at least one real failing test";
  for (std::size_t t : failing) {
    const bool covers_bug = std::any_of(buggy.begin(), buggy.end(),
                                        [&](std::size_t s) { return p.coverage.cover.get(t, s); });
    if (!covers_bug) {
      return "real failing test '" + p.coverage.tests[t] + "' covers no buggy statement";
    }
  }
  return std::nullopt;
}

CampaignResult run_campaign(const SyntheticProgram& program, const FlakinessModel& model,
                            const CampaignConfig& config, const RngStream& rng) {
  if (auto violation = find_violation(program)) throw InvariantError(*violation);
  if (config.population == 0 || config.budget < config.population) {
    throw InvariantError("campaign needs budget >= population >= 1");
  }
  const CoverageMatrix& m = program.coverage;
  const auto probs = resolve_probabilities(model, m.tests);

  RngStream fl_rng = rng.substream(0);
  RngStream search_rng = rng.substream(1);
  RngStream validation_rng = rng.substream(2);

  std::vector<Outcome> outcomes = m.baseline;
  if (!config.targeted) {
    outcomes = perturb_outcomes(m.baseline, IndependentFlakes(probs), model.direction, fl_rng)
                   .outcomes;
  }
  const auto fl = localize(m, outcomes, config.threshold, config.mode);

  std::vector<std::size_t> ingredients;
  std::vector<double> cumulative;
  double total_weight = 0.0;
  std::vector<bool> is_ingredient(m.n_statements(), false);
  for (std::size_t s = 0; s < m.n_statements(); ++s) {
    const auto& st = fl.statements[s];
    if (!st.selected || *st.score <= 0.0) continue;
    ingredients.push_back(s);
    is_ingredient[s] = true;
    total_weight += *st.score;
    cumulative.push_back(total_weight);
  }

  CampaignResult result;
  result.ingredient_count = ingredients.size();
  std::vector<std::size_t> executed;
  for (std::size_t t = 0; t < m.n_tests(); ++t) {
    if (is_failing(outcomes[t])) {
      ++result.failing_test_count;
      executed.push_back(t);
      continue;
    }
    bool positive = false;
    m.cover.for_each_in_row(t, [&](std::size_t s) { positive = positive || is_ingredient[s]; });
    if (positive) {
      ++result.positive_test_count;
      executed.push_back(t);
    }
  }
  result.executed_test_count = executed.size();

  double all_pass = 1.0;
  for (std::size_t t : executed) all_pass *= 1.0 - probs[t];
  result.validation_flake_probability = 1.0 - all_pass;
  if (ingredients.empty()) return result;

  std::vector<bool> is_buggy(m.n_statements(), false);
  for (std::size_t s : program.buggy_statements) is_buggy[s] = true;

  result.generations_used = (config.budget + config.population - 1) / config.population;
  for (std::size_t i = 0; i < config.budget; ++i) {
    const double pick = search_rng.uniform() * total_weight;
    const auto pos = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
    const std::size_t statement = ingredients[std::min(pos, ingredients.size() - 1)];
    const bool fixes = search_rng.bernoulli(program.fix_probability) && is_buggy[statement];

    bool flaked = false;
    if (config.targeted) {
      flaked = validation_rng.bernoulli(result.validation_flake_probability);
    } else {
      for (std::size_t t : executed) flaked = validation_rng.bernoulli(probs[t]) || flaked;
    }
    ++result.evaluated_candidates;
    if (fixes && !flaked) ++result.valid_patch_count;
  }
  return result;
}

TargetedComparison compare_targeted(const SyntheticProgram& program, const FlakinessModel& model,
                                    const CampaignConfig& config, std::size_t runs,
                                    std::uint64_t seed, unsigned jobs) {
  if (runs < 2) throw InvariantError("a paired comparison needs at least two runs");
  TargetedComparison cmp;
  cmp.targeted.resize(runs);
  cmp.non_targeted.resize(runs);
  CampaignConfig targeted = config;
  targeted.targeted = true;
  CampaignConfig plain = config;
  plain.targeted = false;
  parallel_for(runs, jobs, [&](std::size_t i) {
    const RngStream rng(seed, i);
    cmp.targeted[i] = run_campaign(program, model, targeted, rng);
    cmp.non_targeted[i] = run_campaign(program, model, plain, rng);
  });

  std::vector<double> x, y;
  for (std::size_t i = 0; i < runs; ++i) {
    x.push_back(static_cast<double>(cmp.targeted[i].valid_patch_count));
    y.push_back(static_cast<double>(cmp.non_targeted[i].valid_patch_count));
  }
  cmp.targeted_median = *median(x);
  cmp.non_targeted_median = *median(y);
  cmp.test = wilcoxon_signed_rank(x, y);
  return cmp;
}

SyntheticProgram generate_fixture(const FixtureParams& params, std::uint64_t seed) {
  if (params.tests == 0 || params.statements == 0 || params.groups == 0) {
    throw InvariantError("fixture needs at least one test, statement and group");
  }
  if (params.failing_tests == 0 || params.failing_tests > params.tests) {
    throw InvariantError("fixture needs between 1 and `tests` real failing tests");
  }
  if (params.buggy_statements == 0 || params.buggy_statements > params.statements) {
    throw InvariantError("fixture needs between 1 and `statements` buggy statements");
  }
  if (params.covering_tests_per_buggy < params.failing_tests ||
      params.covering_tests_per_buggy > params.tests) {
    throw InvariantError("covering tests per buggy statement must lie in [failing_tests, tests]");
  }
  if (!(params.coverage_density >= 0.0 && params.coverage_density <= 1.0)) {
    throw InvariantError("coverage density must lie in [0, 1]");
  }

  RngStream rng(seed, 0);
  SyntheticProgram prog;
  prog.fix_probability = params.fix_probability;
  CoverageMatrix& m = prog.coverage;
  const std::size_t per_group = (params.tests + params.groups - 1) / params.groups;
  for (std::size_t t = 0; t < params.tests; ++t) {
    m.tests.push_back("pkg.C" + std::to_string(t / per_group) + "#test" + std::to_string(t));
    m.baseline.push_back(t < params.failing_tests ? Outcome::Fail : Outcome::Pass);
  }
  for (std::size_t s = 0; s < params.statements; ++s) m.statements.push_back("s" + std::to_string(s));
  m.cover = BitMatrix(params.tests, params.statements);

  std::vector<std::size_t> order(params.statements);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < params.buggy_statements; ++i) {
    std::swap(order[i], order[i + rng.below(params.statements - i)]);
  }
  prog.buggy_statements.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(params.buggy_statements));
  std::sort(prog.buggy_statements.begin(), prog.buggy_statements.end());
  std::vector<bool> buggy(params.statements, false);
  for (std::size_t s : prog.buggy_statements) buggy[s] = true;

  for (std::size_t t = 0; t < params.tests; ++t) {
    for (std::size_t s = 0; s < params.statements; ++s) {
      const bool covered = rng.bernoulli(params.coverage_density);
      if (covered && !buggy[s]) m.cover.set(t, s);
    }
  }

  const std::size_t passing = params.tests - params.failing_tests;
  const std::size_t extra = params.covering_tests_per_buggy - params.failing_tests;
  for (std::size_t s : prog.buggy_statements) {
    for (std::size_t t = 0; t < params.failing_tests; ++t) m.cover.set(t, s);
    std::vector<std::size_t> pool(passing);
    std::iota(pool.begin(), pool.end(), params.failing_tests);
    for (std::size_t i = 0; i < extra; ++i) {
      std::swap(pool[i], pool[i + rng.below(passing - i)]);
      m.cover.set(pool[i], s);
    }
  }
  if (auto violation = find_violation(prog)) throw InvariantError(*violation);
  return prog;
}

}  // namespace flakilab
