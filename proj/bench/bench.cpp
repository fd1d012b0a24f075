// Serial reference vs OpenMP kernels. Run: ./build/bench/qalloc_bench

#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "qalloc/calibration.hpp"
#include "qalloc/defense.hpp"
#include "qalloc/experiment.hpp"
#include "qalloc/kernels.hpp"
#include "qalloc/topology.hpp"

using namespace qalloc;

namespace {

std::vector<std::vector<Qubit>> adjacency_of(const CouplingGraph& g) {
  std::vector<std::vector<Qubit>> adj(g.qubit_count());
  for (Qubit q = 0; q < g.qubit_count(); ++q) {
    const auto nb = g.neighbors(q);
    adj[q].assign(nb.begin(), nb.end());
  }
  return adj;
}

void BM_apsp_parallel(benchmark::State& st) {
  const auto adj = adjacency_of(random_connected_graph(static_cast<std::size_t>(st.range(0)), 0.02, 7));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::bfs_all_pairs(adj));
}

void BM_apsp_serial(benchmark::State& st) {
  const auto adj = adjacency_of(random_connected_graph(static_cast<std::size_t>(st.range(0)), 0.02, 7));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::bfs_all_pairs(adj));
}

void BM_apsp_floyd_warshall(benchmark::State& st) {
  const auto g = random_connected_graph(static_cast<std::size_t>(st.range(0)), 0.02, 7);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::floyd_warshall(g.qubit_count(), g.edges()));
}

struct DetectFixture {
  CouplingGraph g = random_connected_graph(400, 0.01, 3);
  CalibrationSeries series = synth_drift(g, CalibrationSnapshot::uniform(g, 0.02, 0.02), 28, 0.3, 11);
  DetectionParams params{10, 1e-9, 1.0};
};

void BM_detect_parallel(benchmark::State& st) {
  const DetectFixture f;
  for (auto _ : st) benchmark::DoNotOptimize(detect(f.series, {0, 13}, {14, 27}, f.params));
}

void BM_detect_serial(benchmark::State& st) {
  const DetectFixture f;
  for (auto _ : st) benchmark::DoNotOptimize(serial::detect(f.series, {0, 13}, {14, 27}, f.params));
}

std::vector<std::uint64_t> seeds(std::size_t n) {
  std::vector<std::uint64_t> s(n);
  std::iota(s.begin(), s.end(), std::uint64_t{1});
  return s;
}

void BM_sweep_parallel(benchmark::State& st) {
  const auto c = preset("hanoi-h1");
  const auto s = seeds(8);
  for (auto _ : st) benchmark::DoNotOptimize(sweep(c, s));
}

void BM_sweep_serial(benchmark::State& st) {
  const auto c = preset("hanoi-h1");
  const auto s = seeds(8);
  for (auto _ : st) benchmark::DoNotOptimize(serial::sweep(c, s));
}

}  // namespace

BENCHMARK(BM_apsp_parallel)->Arg(27)->Arg(256)->Arg(1024)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_apsp_serial)->Arg(27)->Arg(256)->Arg(1024)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_apsp_floyd_warshall)->Arg(27)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_detect_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_detect_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sweep_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sweep_serial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
