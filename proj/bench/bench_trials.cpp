#include <benchmark/benchmark.h>

#include "qauth/harness.hpp"

namespace {

qauth::ScenarioSpec spec(bool swap_mode) {
  qauth::ScenarioSpec s;
  s.seed = 1;
  s.trials = 2000;
  s.session.k = 17;
  s.session.d = 41;
  s.session.reveal_count = 8;
  s.attack.kind = qauth::AttackKind::InterceptResend;
  if (swap_mode) {
    s.session.mode = qauth::Mode::Swap;
    s.session.belief_rule = qauth::BeliefRule::ComposeTable1;
    s.attack.kind = qauth::AttackKind::None;
  }
  return s;
}

void BM_Serial(benchmark::State& state) {
  const auto s = spec(state.range(0) != 0);
  for (auto _ : state) benchmark::DoNotOptimize(qauth::run_trials_serial(s));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.trials));
}

void BM_Parallel(benchmark::State& state) {
  const auto s = spec(state.range(0) != 0);
  for (auto _ : state) benchmark::DoNotOptimize(qauth::run_trials_parallel(s, 0));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.trials));
}

}  // namespace

BENCHMARK(BM_Serial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Parallel)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
