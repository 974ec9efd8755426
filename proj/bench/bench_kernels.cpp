// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS set to the
// core count; on a single core both paths should take about the same time.

#include <benchmark/benchmark.h>

#include <random>

#include "mapfsel/feather.hpp"
#include "mapfsel/gbdt.hpp"
#include "mapfsel/graph_encode.hpp"

using namespace mapfsel;

namespace {

EncodedGraph grid_graph(int side) {
  auto grid = std::make_shared<const GridMap>(GridMap::open("bench", side, side));
  std::vector<int> s, t;
  for (int a = 0; a < 50; ++a) {
    s.push_back(a);
    t.push_back(grid->num_cells() - 1 - a);
  }
  return encode_fg2v(MapfInstance(grid, s, t));
}

Execution exec_of(const benchmark::State& state) {
  return state.range(1) ? Execution::parallel : Execution::serial;
}

void BM_Propagate(benchmark::State& state) {
  const auto graph = grid_graph(static_cast<int>(state.range(0)));
  const WalkOperator op(graph);
  constexpr int kCols = 50;
  std::vector<double> in(static_cast<std::size_t>(op.num_nodes()) * kCols, 1.0), out(in.size());
  for (auto _ : state) {
    op.propagate(in, out, kCols, exec_of(state));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * op.num_nodes());
}

void BM_Embed(benchmark::State& state) {
  const auto graph = grid_graph(static_cast<int>(state.range(0)));
  const FeatherConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(embed_graph(graph, cfg, exec_of(state)));
}

void BM_Train(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 1.0);
  const int n = static_cast<int>(state.range(0));
  TrainingSet data{200, 5, {}, {}, {}};
  std::vector<double> x(200);
  for (int i = 0; i < n; ++i) {
    for (auto& v : x) v = z(rng);
    data.add(x, x[0] > 0.5 ? 0 : x[1] > 0 ? 1 : x[2] > 0 ? 2 : x[3] > 0 ? 3 : 4);
  }
  Hyperparams p;
  p.rounds = 10;
  p.max_depth = 6;
  for (auto _ : state) benchmark::DoNotOptimize(train(data, p, 0, exec_of(state)));
}

}  // namespace

BENCHMARK(BM_Propagate)->ArgsProduct({{64, 256}, {0, 1}})->ArgNames({"side", "omp"})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Embed)->ArgsProduct({{64, 256}, {0, 1}})->ArgNames({"side", "omp"})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Train)->ArgsProduct({{2000}, {0, 1}})->ArgNames({"rows", "omp"})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
