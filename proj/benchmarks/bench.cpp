#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "replsim/algorithms.hpp"
#include "replsim/batching.hpp"
#include "replsim/engine.hpp"
#include "replsim/generators.hpp"
#include "replsim/lp.hpp"

using namespace replsim;

namespace {

Instance adwords() {
  GeneratorParams p;
  p.family = "Adwords";
  p.c = 60;
  p.seed = 3;
  return generate(p);
}

void BM_EngineRun(benchmark::State& state) {
  Instance inst = adwords();
  auto policy = make_greedy();
  RunOptions opt;
  opt.record_trace = false;
  for (auto _ : state) {
    ++opt.trial;
    benchmark::DoNotOptimize(run(inst, *policy, opt).objective);
  }
}
BENCHMARK(BM_EngineRun);

void BM_WrappedRun(benchmark::State& state) {
  Instance inst = adwords();
  RunOptions opt;
  opt.record_trace = false;
  for (auto _ : state) {
    ++opt.trial;
    auto policy = wrap_adversarial(make_greedy());
    benchmark::DoNotOptimize(run(inst, *policy, opt).objective);
  }
}
BENCHMARK(BM_WrappedRun);

void BM_LpSolve(benchmark::State& state) {
  GeneratorParams p;
  p.family = "HardGS";
  p.c = static_cast<double>(state.range(0));
  p.gamma = 1.0;
  Instance inst = generate(p);
  for (auto _ : state) {
    LpModel model = build_lp(inst);
    benchmark::DoNotOptimize(solve_lp(model).value);
  }
}
BENCHMARK(BM_LpSolve)->Arg(8)->Arg(16)->Arg(32);

void BM_LumpAccumulator(benchmark::State& state) {
  std::mt19937_64 eng(99);
  std::uniform_real_distribution<double> amt(0.0, 2.0);
  std::vector<double> drip(1 << 14);
  for (double& v : drip) v = amt(eng);
  for (auto _ : state) {
    BatchState bs(1, 5.0);
    double total = 0.0;
    for (double v : drip) total += bs.step(0, v);
    benchmark::DoNotOptimize(total);
  }
}
BENCHMARK(BM_LumpAccumulator);

}  // namespace

BENCHMARK_MAIN();
