// OpenMP cluster-parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include "reflect/eval.hpp"
#include "reflect/synthetic.hpp"

using namespace reflect;

namespace {

const std::vector<DocumentCluster>& corpus() {
  static const auto c = make_synthetic_corpus({});
  return c;
}

OracleCriterion criterion() {
  OracleCriterion k;
  k.min_select = 6;
  return k;
}

const std::vector<Example>& examples() {
  static const auto e = make_examples(corpus(), supervise_all(corpus(), criterion(), {}), {}, 512);
  return e;
}

Checkpoint checkpoint() {
  Rng rng(1);
  ScorerParams p = ScorerParams::initial(feature::kDim, 3);
  for (std::size_t h = 0; h < feature::kDim; ++h) p.values()[p.head_weight(1, h)] = 0.3 * rng.normal();
  return {p, true};
}

void BM_SuperviseParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(supervise_all(corpus(), criterion(), {}));
}

void BM_SuperviseSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(supervise_all_serial(corpus(), criterion(), {}));
}

void BM_GenerateParallel(benchmark::State& state) {
  const auto ck = checkpoint();
  auto abs = make_abstractor({});
  for (auto _ : state) benchmark::DoNotOptimize(generate_all(examples(), ck, *abs, {}));
}

void BM_GenerateSerial(benchmark::State& state) {
  const auto ck = checkpoint();
  auto abs = make_abstractor({});
  for (auto _ : state) benchmark::DoNotOptimize(generate_all_serial(examples(), ck, *abs, {}));
}

}  // namespace

BENCHMARK(BM_SuperviseParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SuperviseSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GenerateParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GenerateSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
