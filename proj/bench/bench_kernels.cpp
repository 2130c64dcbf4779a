// Serial vs OpenMP timings for the two heavy kernels.

#include <benchmark/benchmark.h>

#include "difnet/simulator.hpp"
#include "difnet/theory.hpp"

namespace {

using namespace difnet;

struct Scenario {
  Graph g;
  CombinationMatrix cm;
  SignalProfile profile;
  AdaptationConfig cfg;
};

Scenario make_scenario(std::size_t n, double p, std::size_t m) {
  Graph g = gen_erdos_renyi(n, p, 1, 10000);
  auto cm = CombinationMatrix::uniform(g);
  auto prof = random_profile(m, 0.8, 1.8, n, 0.01, 1);
  AdaptationConfig cfg{informed_order(g, {}), UniformStep{0.01}};
  return {std::move(g), std::move(cm), std::move(prof), std::move(cfg)};
}

void BM_MonteCarlo(benchmark::State& state) {
  static const Scenario s = make_scenario(20, 0.3, 5);
  const auto exec = state.range(0) ? Execution::parallel : Execution::serial;
  for (auto _ : state) {
    auto tr = monte_carlo(s.g, s.cm, s.profile, s.cfg, 2000, 16, 7, exec);
    benchmark::DoNotOptimize(tr.msd_linear.data());
  }
}
BENCHMARK(BM_MonteCarlo)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_ExactMsd(benchmark::State& state) {
  static const Scenario s = make_scenario(200, 0.075, 5);
  static const ErrorSystem es = build_error_system(s.cm, s.profile, s.cfg, s.g);
  const auto exec = state.range(0) ? Execution::parallel : Execution::serial;
  for (auto _ : state) benchmark::DoNotOptimize(exact_msd(es, exec));
}
BENCHMARK(BM_ExactMsd)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_ExactRate(benchmark::State& state) {
  static const Scenario s = make_scenario(200, 0.075, 5);
  static const ErrorSystem es = build_error_system(s.cm, s.profile, s.cfg, s.g);
  for (auto _ : state) benchmark::DoNotOptimize(exact_rate(es));
}
BENCHMARK(BM_ExactRate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
