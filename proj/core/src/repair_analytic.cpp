#include "flakilab/repair_analytic.hpp"

#include <cmath>

#include "flakilab/error.hpp"
#include "flakilab/parallel.hpp"
#include "flakilab/rng.hpp"

namespace flakilab {

namespace {

void require_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvariantError("flake probability " + std::to_string(p) + " is outside [0, 1]");
  }
}

}  // namespace

double patch_survival_prob(double p, std::size_t covering_tests) {
  require_probability(p);
  if (covering_tests == 0 || p == 0.0) return 1.0;
  if (p == 1.0) return 0.0;
  return std::exp(static_cast<double>(covering_tests) * std::log1p(-p));
}

double patch_invalidation_prob(double p, std::size_t covering_tests) {
  require_probability(p);
  if (covering_tests == 0 || p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  return -std::expm1(static_cast<double>(covering_tests) * std::log1p(-p));
}

double expected_surviving(std::span<const PatchRecord> patches, double p) {
  double sum = 0.0;
  for (const auto& patch : patches) sum += patch_survival_prob(p, patch.covering_count());
  return sum;
}

double prob_at_least_one(std::span<const PatchRecord> patches, double p) {
  require_probability(p);
  if (patches.empty()) return 0.0;
  double all_rejected = 1.0;
  for (const auto& patch : patches) all_rejected *= patch_invalidation_prob(p, patch.covering_count());
  return 1.0 - all_rejected;
}

AnalyticRepairReport analyze_repair(const RepairScenario& scenario, double p) {
  validate(scenario);
  require_probability(p);
  const auto valid = scenario.valid();
  const auto genuine = scenario.genuine();

  AnalyticRepairReport r;
  r.p = p;
  r.valid_count = valid.size();
  r.genuine_count = genuine.size();
  r.expected_valid = expected_surviving(valid, p);
  r.expected_genuine = expected_surviving(genuine, p);
  r.p_at_least_one_valid = prob_at_least_one(valid, p);
  r.p_at_least_one_genuine = prob_at_least_one(genuine, p);
  std::size_t covering = 0;
  for (const auto& v : valid) {
    covering += v.covering_count();
    r.valid_patches.push_back({v.id, v.covering_count(), patch_invalidation_prob(p, v.covering_count())});
  }
  if (!valid.empty()) {
    r.covering_per_patch = static_cast<double>(covering) / static_cast<double>(valid.size());
  }
  return r;
}

MonteCarloRepair monte_carlo_repair(std::span<const PatchRecord> patches, double p,
                                    std::size_t replicates, std::uint64_t seed, unsigned jobs) {
  require_probability(p);
  if (replicates == 0) throw InvariantError("Monte-Carlo repair needs at least one replicate");

  std::vector<std::size_t> survivors(replicates, 0);
  parallel_for(replicates, jobs, [&](std::size_t r) {
    RngStream rng(seed, r);
    std::size_t alive = 0;
    for (const auto& patch : patches) {
      bool flaked = false;
      for (std::size_t t = 0; t < patch.covering_count(); ++t) {
        flaked = rng.bernoulli(p) || flaked;
      }
      alive += flaked ? 0 : 1;
    }
    survivors[r] = alive;
  });

  MonteCarloRepair mc;
  mc.replicates = replicates;
  mc.histogram.assign(patches.size() + 1, 0);
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t any = 0;
  for (std::size_t s : survivors) {
    ++mc.histogram[s];
    sum += static_cast<double>(s);
    sum_sq += static_cast<double>(s) * static_cast<double>(s);
    any += s > 0 ? 1 : 0;
  }
  const auto n = static_cast<double>(replicates);
  mc.mean_surviving = sum / n;
  mc.std_surviving = std::sqrt(std::max(0.0, sum_sq / n - mc.mean_surviving * mc.mean_surviving));
  mc.standard_error = mc.std_surviving / std::sqrt(n);
  mc.p_at_least_one = static_cast<double>(any) / n;
  return mc;
}

GenuineAdvantage genuine_advantage(const RepairScenario& scenario, double p) {
  validate(scenario);
  const auto valid = scenario.valid();
  const auto genuine = scenario.genuine();
  if (valid.empty() || genuine.empty()) {
    throw InvariantError("genuine advantage needs at least one valid and one genuine patch");
  }
  GenuineAdvantage g;
  g.p_genuine = prob_at_least_one(genuine, p);
  g.mean_valid_survival = expected_surviving(valid, p) / static_cast<double>(valid.size());
  if (g.mean_valid_survival > 0.0) {
    g.ratio = g.p_genuine / g.mean_valid_survival;
    g.relative_difference = *g.ratio - 1.0;
  }
  return g;
}

}  // namespace flakilab
