#include <benchmark/benchmark.h>

#include "mtrl/e3.hpp"
#include "mtrl/envs.hpp"
#include "mtrl/estimation.hpp"
#include "mtrl/finite_model.hpp"
#include "mtrl/mdp.hpp"

namespace {

using namespace mtrl;

const MdpFamily& family() {
  static const MdpFamily f = gridworld_suite();
  return f;
}

void BM_ValueIterationCold(benchmark::State& state) {
  const Mdp& mdp = family().members[0];
  for (auto _ : state) {
    const auto plan = value_iteration(mdp, 1e-6);
    benchmark::DoNotOptimize(plan.value.values.data());
  }
}
BENCHMARK(BM_ValueIterationCold);

void BM_ValueIterationWarm(benchmark::State& state) {
  const Mdp& mdp = family().members[0];
  const auto warm = value_iteration(mdp, 1e-6);
  for (auto _ : state) {
    const auto plan = value_iteration(mdp, 1e-6, warm.value);
    benchmark::DoNotOptimize(plan.value.values.data());
  }
}
BENCHMARK(BM_ValueIterationWarm);

void BM_Diameter(benchmark::State& state) {
  const Mdp& mdp = family().members[0];
  for (auto _ : state) {
    benchmark::DoNotOptimize(diameter(mdp, 1e-6));
  }
}
BENCHMARK(BM_Diameter);

void BM_E3Task(benchmark::State& state) {
  const std::int64_t horizon = state.range(0);
  std::uint64_t seed = 1;
  for (auto _ : state) {
    MdpSimulator env(family().members[0], family().start_state, seed++);
    E3Params params;
    params.horizon = horizon;
    params.schedule = ThresholdSchedule::fixed(5);
    const E3Result res = run_e3_task(env, params);
    benchmark::DoNotOptimize(res.log.cum_reward);
  }
  state.SetItemsProcessed(state.iterations() * horizon);
}
BENCHMARK(BM_E3Task)->Arg(1000)->Arg(3000);

void BM_EliminationUpdate(benchmark::State& state) {
  ThetaVector a;
  a.values.assign(26, 0.0);
  a.values[0] = 1.0;
  a.values[25] = 0.95;
  a.sample_size = 1000;
  ThetaVector b = a;
  b.values[25] = 0.0;
  ThetaVector c = a;
  c.values[25] = 0.5;
  const std::vector<const ThetaVector*> thetas = {&a, &b, &c};
  const std::vector<double> radii = {0.05, 0.05, 0.05};
  const EncodedOutcome z = encode_transition({0, 0, 1, 0}, 25);
  for (auto _ : state) {
    VersionSpace vs(3, 1e12);
    update_elimination(vs, thetas, radii, z, 4.0);
    benchmark::DoNotOptimize(vs.surviving_count());
  }
}
BENCHMARK(BM_EliminationUpdate);

}  // namespace

BENCHMARK_MAIN();
