// OpenMP kernels against their serial references, plus whole experiments at
// different worker counts.

#include "divels/dualiv.hpp"
#include "divels/kernels.hpp"
#include "divels/runner.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

#include <random>

using namespace divels;

namespace {

Eigen::MatrixXd points(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = u(rng);
  return m;
}

const KernelSpec kPoly = KernelSpec::polynomial(3, 1.0);

void BM_Gram(benchmark::State& state) {
  const auto x = points(state.range(0), 4, 1);
  for (auto _ : state) benchmark::DoNotOptimize(gram(kPoly, x, x));
  state.SetComplexityN(state.range(0));
}

void BM_GramSerial(benchmark::State& state) {
  const auto x = points(state.range(0), 4, 1);
  for (auto _ : state) benchmark::DoNotOptimize(gram_serial(kPoly, x, x));
  state.SetComplexityN(state.range(0));
}

DualIVModel model_of_size(Eigen::Index n) {
  DualIVModel m;
  m.k_spec = kPoly;
  m.train_xs = points(n, 4, 2);
  m.thetas = points(n, 1, 3).col(0);
  return m;
}

void BM_PredictBatch(benchmark::State& state) {
  const auto m = model_of_size(512);
  const auto at = points(state.range(0), 4, 4);
  for (auto _ : state) benchmark::DoNotOptimize(predict_batch(m, at));
}

void BM_PredictBatchSerial(benchmark::State& state) {
  const auto m = model_of_size(512);
  const auto at = points(state.range(0), 4, 4);
  for (auto _ : state) benchmark::DoNotOptimize(predict_batch_serial(m, at));
}

void BM_Experiment(benchmark::State& state) {
  RunConfig c;
  c.horizon = 256;
  c.repeats = 8;
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(c, static_cast<int>(state.range(0))));
}

}  // namespace

BENCHMARK(BM_Gram)->RangeMultiplier(2)->Range(128, 1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GramSerial)->RangeMultiplier(2)->Range(128, 1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictBatch)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictBatchSerial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Experiment)->Arg(1)->Arg(omp_get_num_procs())->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
