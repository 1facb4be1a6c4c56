#include <benchmark/benchmark.h>

#include "ggda/fgw.hpp"
#include "ggda/gcn.hpp"
#include "ggda/generation.hpp"
#include "ggda/ot.hpp"
#include "ggda/partition.hpp"
#include "ggda/synth.hpp"
#include "support/graphs.hpp"

namespace {

void BM_WassersteinExact(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ggda::Rng rng(1);
  ggda::Matrix a(n, 4), b(n, 4);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 4; ++j) {
      a(i, j) = ggda::standard_normal(rng);
      b(i, j) = ggda::standard_normal(rng) + 1.0;
    }
  const ggda::Matrix cost = ggda::euclidean_distances(a, b);
  const ggda::Vector h = ggda::Vector::Constant(n, 1.0 / n);
  for (auto _ : state) benchmark::DoNotOptimize(ggda::solve_linear_transport_value(cost, h, h));
}
BENCHMARK(BM_WassersteinExact)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Fgw(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ggda::Rng rng(2);
  const auto g1 = testgraphs::random_graph(n, 4, 0.1, rng), g2 = testgraphs::random_graph(n, 4, 0.1, rng);
  ggda::FgwConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(ggda::fgw_distance(g1, g2, cfg).value);
}
BENCHMARK(BM_Fgw)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Partition(benchmark::State& state) {
  ggda::Rng rng(3);
  const auto g = testgraphs::random_graph(static_cast<int>(state.range(0)), 2, 0.02, rng);
  for (auto _ : state) benchmark::DoNotOptimize(ggda::partition(g, 4, 0).parts);
}
BENCHMARK(BM_Partition)->Arg(300)->Arg(1200)->Unit(benchmark::kMillisecond);

void BM_Generation(benchmark::State& state) {
  const auto sc = ggda::csbm_scenario(0);
  ggda::GenerationConfig cfg;
  cfg.K = 3;
  cfg.trials = 1;
  cfg.source_parts = cfg.target_parts = static_cast<int>(state.range(0));
  cfg.barycenter.bcd_iters = 2;
  for (auto _ : state) benchmark::DoNotOptimize(ggda::generate_sequence(sc.source, sc.target, cfg).intermediates.size());
}
BENCHMARK(BM_Generation)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->Iterations(1);

void BM_Training(benchmark::State& state) {
  const auto g = ggda::csbm_generate(ggda::csbm_source_config(0));
  const auto in = ggda::GcnInput::of(g);
  ggda::WeightedTargets t;
  for (int v = 0; v < g.size(); ++v) {
    t.vertices.push_back(v);
    t.labels.push_back(g.labels()[v]);
  }
  t.weights = ggda::Vector::Constant(g.size(), 1.0 / g.size());
  ggda::TrainConfig cfg;
  cfg.epochs = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ggda::train(in, t, g.n_classes(), cfg).hidden());
}
BENCHMARK(BM_Training)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
