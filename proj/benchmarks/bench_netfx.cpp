#include <benchmark/benchmark.h>

#include "netfx/constraints.hpp"
#include "netfx/estimation.hpp"
#include "netfx/net_effects.hpp"
#include "netfx/simulator.hpp"

using namespace netfx;

namespace {

const DgpSpec& markov_dgp() {
  static const auto dgp = DgpSpec::parse_file(NETFX_DATA_DIR "/dgp/markov_t8.dgp");
  return dgp;
}

const PatternSpec& last_three() {
  static const auto p = PatternSpec::parse_file(NETFX_DATA_DIR "/patterns/last_three.pattern");
  return p;
}

void BM_BuildTree(benchmark::State& state) {
  const auto data = simulate(markov_dgp(), static_cast<std::size_t>(state.range(0)), 1);
  const auto records = data.records();
  for (auto _ : state) {
    Dataset d(records, 8, 1);
    benchmark::DoNotOptimize(d.tree().size());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildTree)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_ExactNetEffects(benchmark::State& state) {
  const auto dgp = DgpSpec::parse_text(
      "horizon " + std::to_string(state.range(0)) +
      "\ntreat 0.5 when t == 1\ntreat 0.6 when x[t-1] == 1\ntreat 0.4 otherwise\n"
      "cover 0.6 when z[t] == 1\ncover 0.4 otherwise\neffect 1 otherwise\nkappa 1 otherwise\n");
  const auto tree = population_table(dgp);
  for (auto _ : state) benchmark::DoNotOptimize(exact_net_effects(tree).phi.size());
  state.counters["strata"] = static_cast<double>(tree.size());
}
BENCHMARK(BM_ExactNetEffects)->DenseRange(2, 8, 2);

void BM_Constraints(benchmark::State& state) {
  const auto data = simulate(markov_dgp(), static_cast<std::size_t>(state.range(0)), 2);
  const auto scope = state.range(1) ? Scope::markov : Scope::full;
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_constraints(last_three(), data.tree(), scope, VarianceMode::estimated()).rows.size());
  }
}
BENCHMARK(BM_Constraints)->Args({4000, 0})->Args({4000, 1})->Args({40000, 0})->Args({40000, 1});

void BM_Pipeline(benchmark::State& state) {
  const auto data = simulate(markov_dgp(), static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_pipeline(data.tree(), last_three(), Scope::markov, VarianceMode::known(100.0)).fit.rank);
  }
}
BENCHMARK(BM_Pipeline)->Arg(4000)->Arg(40000);

void BM_SaturatedFit(benchmark::State& state) {
  const auto dgp = DgpSpec::parse_file(NETFX_DATA_DIR "/dgp/last_three_t3.dgp");
  const auto small = simulate(dgp, static_cast<std::size_t>(state.range(0)), 4);
  const auto spec = saturated_pattern(small.tree());
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_pipeline(small.tree(), spec, Scope::full, VarianceMode::known(100.0)).fit.rank);
  }
  state.counters["k"] = spec.dimension();
}
BENCHMARK(BM_SaturatedFit)->Arg(4000);

}  // namespace

BENCHMARK_MAIN();
