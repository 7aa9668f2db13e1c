#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "wrenchsim/batch.hpp"
#include "wrenchsim/scenario_io.hpp"

using namespace wrenchsim;

namespace {

std::vector<Scenario> noisy_batch(int n) {
  const Scenario base =
      load_scenario(std::string(WRENCHSIM_SOURCE_DIR) + "/scenarios/noisy.json").scenario;
  std::vector<Scenario> batch(static_cast<std::size_t>(n), base);
  for (int i = 0; i < n; ++i) batch[static_cast<std::size_t>(i)].seed = 1000 + static_cast<std::uint64_t>(i);
  return batch;
}

void BM_BatchSerial(benchmark::State& state) {
  const auto batch = noisy_batch(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_batch_serial(batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BatchParallel(benchmark::State& state) {
  const auto batch = noisy_batch(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_batch_parallel(batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_BatchSerial)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BatchParallel)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
