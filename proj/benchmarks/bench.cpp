#include <benchmark/benchmark.h>

#include <random>

#include "shred/decomp.hpp"
#include "shred/fixtures.hpp"
#include "shred/matching.hpp"
#include "shred/metrics.hpp"
#include "shred/oracle.hpp"
#include "shred/pipeline.hpp"

namespace {

using namespace shred;

const Shape& fixture() {
  static const Shape shape = make_box_assembly(0);
  return shape;
}

void BM_Fps(benchmark::State& state) {
  const auto& shape = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(fps_cluster(shape, static_cast<std::size_t>(state.range(0)), 1));
  }
  state.SetLabel(std::to_string(shape.size()) + " points");
}
BENCHMARK(BM_Fps)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Adjacency(benchmark::State& state) {
  const auto& shape = fixture();
  const auto d = fps_cluster(shape, static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(adjacency(shape, d, 0.025));
}
BENCHMARK(BM_Adjacency)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_OraclePipeline(benchmark::State& state) {
  const auto& shape = fixture();
  const auto ops = oracle_operators(shape);
  PipelineConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(shape, ops, config));
}
BENCHMARK(BM_OraclePipeline)->Unit(benchmark::kMillisecond);

void BM_Metrics(benchmark::State& state) {
  const auto& shape = fixture();
  const auto d = fps_cluster(shape, 64, 1);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(shape, d));
}
BENCHMARK(BM_Metrics)->Unit(benchmark::kMicrosecond);

void BM_OversegMatch(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise;
  InstanceMatrix logits(512, 10);
  std::vector<std::size_t> target(512);
  for (std::size_t r = 0; r < 512; ++r) {
    target[r] = rng() % 6;
    for (std::size_t c = 0; c < 10; ++c) logits(r, c) = noise(rng);
  }
  const auto t = InstanceMatrix::one_hot(target, 10);
  for (auto _ : state) benchmark::DoNotOptimize(overseg_match(logits, t));
}
BENCHMARK(BM_OversegMatch)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
