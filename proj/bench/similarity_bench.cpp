// Serial vs OpenMP best-row scan over a node-embedding matrix.

#include <benchmark/benchmark.h>

#include <random>

#include "kgg/ground/similarity_kernels.hpp"

using namespace kgg::ground;

namespace {

struct Inputs {
  EmbeddingMatrix matrix;
  std::vector<double> query;
};

Inputs make_inputs(std::size_t rows, std::size_t dim) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  Inputs in;
  in.matrix.dimension = dim;
  std::vector<double> v(dim);
  for (std::size_t r = 0; r < rows; ++r) {
    for (auto& x : v) x = n(rng);
    in.matrix.append(v);
  }
  in.query.resize(dim);
  for (auto& x : in.query) x = n(rng);
  return in;
}

void BM_BestRowSerial(benchmark::State& state) {
  const auto in = make_inputs(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(best_row_serial(in.matrix, in.query));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BestRowParallel(benchmark::State& state) {
  const auto in = make_inputs(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(best_row_parallel(in.matrix, in.query));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_BestRowSerial)->Args({1000, 1536})->Args({20000, 1536})->Args({100000, 384})->UseRealTime();
BENCHMARK(BM_BestRowParallel)->Args({1000, 1536})->Args({20000, 1536})->Args({100000, 384})->UseRealTime();

BENCHMARK_MAIN();
