#include <benchmark/benchmark.h>

#include "rmab/belief_space.hpp"
#include "rmab/linear_solve.hpp"
#include "rmab/oracle.hpp"
#include "rmab/pcl.hpp"
#include "rmab/pipeline.hpp"
#include "rmab/simulator.hpp"

namespace {

rmab::ArmSpec example(rmab::ObservationMode mode) {
  rmab::ArmSpec s;
  s.P = rmab::Matrix{{0.8, 0.2}, {0.2, 0.8}};
  s.E = s.P;
  s.R = rmab::Matrix{{0.0, 0.0}, {0.0, 1.0}};
  s.mode = mode;
  return s;
}

const rmab::Belief kInitial({0.6, 0.4});

// Approximate space of the two-state example, T from the argument.
void BM_Enumerate(benchmark::State& state) {
  const rmab::ArmModel m(example(rmab::ObservationMode::ObservationOnly));
  const int steps = static_cast<int>(state.range(0));
  std::size_t size = 0;
  for (auto _ : state) {
    auto space = rmab::enumerate_approx(m, kInitial, steps, 1e-3);
    size = space.size();
    benchmark::DoNotOptimize(space);
  }
  state.counters["states"] = static_cast<double>(size);
}
BENCHMARK(BM_Enumerate)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_AdaptiveGreedy(benchmark::State& state) {
  const rmab::ArmModel m(example(rmab::ObservationMode::ObservationOnly));
  const auto k = rmab::build_kernels(
      rmab::enumerate_approx(m, kInitial, static_cast<int>(state.range(0)), 1e-3), m, 0.95);
  for (auto _ : state) benchmark::DoNotOptimize(rmab::adaptive_greedy(k));
  state.counters["states"] = static_cast<double>(k.size());
}
BENCHMARK(BM_AdaptiveGreedy)->Arg(4)->Arg(6)->Arg(7)->Unit(benchmark::kMillisecond);

void BM_Bisection(benchmark::State& state) {
  const rmab::ArmModel m(example(rmab::ObservationMode::RewardOnly));
  const auto k = rmab::build_kernels(rmab::enumerate_approx(m, kInitial, 6, 1e-3), m, 0.95);
  for (auto _ : state) benchmark::DoNotOptimize(rmab::whittle_bisection(k, 0));
  state.counters["states"] = static_cast<double>(k.size());
}
BENCHMARK(BM_Bisection)->Unit(benchmark::kMillisecond);

// One episode of 200 slots over N copies of the example arm, K = 1.
void BM_Episode(benchmark::State& state) {
  const auto p = rmab::build_arm_pipeline(example(rmab::ObservationMode::ObservationOnly),
                                          kInitial, 6, 1e-3, 0.95);
  rmab::SystemConfig c;
  for (int n = 0; n < state.range(0); ++n) {
    c.arms.push_back({p.model, kInitial, p.space, p.kernels, p.index});
  }
  c.horizon = 200;
  std::uint64_t episode = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        rmab::simulate_episode(c, rmab::PolicyKind::Whittle, episode++, false));
  }
}
BENCHMARK(BM_Episode)->Arg(2)->Arg(30)->Unit(benchmark::kMicrosecond);

void BM_GenerateInstance(benchmark::State& state) {
  rmab::GeneratorOptions g;
  g.max_states = rmab::kDenseSolveLimit;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(rmab::generate_instance(3, seed++, g));
}
BENCHMARK(BM_GenerateInstance)->Iterations(5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
