#include "flakilab/flakiness.hpp"

#include "flakilab/error.hpp"

namespace flakilab {

namespace {

bool flips_passes(Direction d) { return d != Direction::FailToPass; }
bool flips_failures(Direction d) { return d != Direction::PassToFail; }

}  // namespace

FlakeCounters count_outcomes(std::span<const Outcome> outcomes) noexcept {
  FlakeCounters c;
  c.nbTests = outcomes.size();
  for (Outcome o : outcomes) {
    switch (o) {
      case Outcome::Pass: ++c.nbPassed; break;
      case Outcome::Fail: ++c.nbRealFailed; break;
      case Outcome::FlakyFail:
      case Outcome::FlakyPass: ++c.nbFlaked; break;
    }
  }
  return c;
}

PerturbedOutcomes perturb_outcomes(std::span<const Outcome> baseline,
                                   const FlakeProcess& process, Direction direction,
                                   RngStream& rng) {
  PerturbedOutcomes out;
  out.outcomes.assign(baseline.begin(), baseline.end());
  std::size_t flaked = 0;
  for (std::size_t t = 0; t < baseline.size(); ++t) {
    const double u = rng.uniform();
    const Outcome o = baseline[t];
    const bool eligible = (o == Outcome::Pass && flips_passes(direction)) ||
                          (o == Outcome::Fail && flips_failures(direction));
    if (!eligible || !(u < process.flip_probability(t, flaked))) continue;
    out.outcomes[t] = o == Outcome::Pass ? Outcome::FlakyFail : Outcome::FlakyPass;
    ++flaked;
  }
  out.counters = count_outcomes(out.outcomes);
  return out;
}

PerturbedOutcomes perturb_outcomes(std::span<const Outcome> baseline,
                                   std::span<const std::string> tests,
                                   std::span<const std::string> groups,
                                   const FlakinessModel& model, RngStream& rng) {
  if (baseline.size() != tests.size()) {
    throw InvariantError("baseline has " + std::to_string(baseline.size()) +
                         " outcomes for " + std::to_string(tests.size()) + " tests");
  }
  IndependentFlakes process(resolve_probabilities(model, tests, groups));
  return perturb_outcomes(baseline, process, model.direction, rng);
}

KillMatrix perturb_kill_matrix(const KillMatrix& m, std::span<const double> probabilities,
                               Direction direction, RngStream& rng) {
  if (probabilities.size() != m.n_tests()) {
    throw InvariantError("one flake probability per test is required");
  }
  KillMatrix out = m;
  for (std::size_t t = 0; t < m.n_tests(); ++t) {
    const double p = probabilities[t];
    const bool passes_original = m.baseline[t] == Outcome::Pass;
    m.cover.for_each_in_row(t, [&](std::size_t k) {
      const double u = rng.uniform();
      if (!passes_original || !(u < p)) return;
      const bool killed = m.kill.get(t, k);
      if (!killed && flips_passes(direction)) out.kill.set(t, k, true);
      if (killed && flips_failures(direction)) out.kill.set(t, k, false);
    });
  }
  return out;
}

KillMatrix perturb_kill_matrix(const KillMatrix& m, const FlakinessModel& model,
                               RngStream& rng) {
  validate(m);
  return perturb_kill_matrix(m, resolve_probabilities(model, m.tests), model.direction, rng);
}

PerturbedOutcomes perturb_fl_run(const CoverageMatrix& m, const FlakinessModel& model,
                                 RngStream& rng) {
  validate(m);
  return perturb_outcomes(m.baseline, m.tests, {}, model, rng);
}

}  // namespace flakilab
