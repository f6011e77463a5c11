#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "qauth/harness.hpp"
#include "qauth/random.hpp"

namespace qauth {

TrialResult run_trial(const ScenarioSpec& spec, std::uint64_t index) {
  RandomSource rand(spec.seed, index);
  const SessionOutcome out = run_session(spec.session, spec.attack, spec.photon, rand);

  TrialResult r;
  r.trial = index;
  r.status = out.status;
  r.alice_tamper_error_rate = out.alice_tamper_error_rate;
  r.bob_tamper_error_rate = out.bob_tamper_error_rate;
  if (!out.bob_key_bits.empty() && out.bob_key_bits.size() == out.alice_key_bits.size()) {
    std::size_t same = 0;
    for (std::size_t i = 0; i < out.alice_key_bits.size(); ++i) {
      same += out.alice_key_bits[i] == out.bob_key_bits[i];
    }
    r.key_match_fraction =
        static_cast<double>(same) / static_cast<double>(out.alice_key_bits.size());
  }
  r.token_accepted = out.status == SessionStatus::AuthAccept;
  r.eve_key_knowledge = out.adversary_report.key_knowledge;
  r.server_copy_match = out.adversary_report.server_copy_match;
  r.event_log_digest = out.events.digest();
  return r;
}

std::vector<TrialResult> run_trials_serial(const ScenarioSpec& spec) {
  std::vector<TrialResult> results;
  results.reserve(spec.trials);
  for (std::uint64_t i = 0; i < spec.trials; ++i) results.push_back(run_trial(spec, i));
  return results;
}

std::vector<TrialResult> run_trials_parallel(const ScenarioSpec& spec, int threads) {
#ifdef _OPENMP
  std::vector<TrialResult> results(spec.trials);
  const auto n = static_cast<std::int64_t>(spec.trials);
  const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 64) num_threads(team)
  for (std::int64_t i = 0; i < n; ++i) {
    results[static_cast<std::size_t>(i)] = run_trial(spec, static_cast<std::uint64_t>(i));
  }
  return results;
#else
  (void)threads;
  return run_trials_serial(spec);
#endif
}

}  // namespace qauth
