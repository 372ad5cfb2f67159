#include <benchmark/benchmark.h>

#include <memory>

#include "guru/data_io.hpp"
#include "guru/rng.hpp"
#include "guru/trainer_kernel.hpp"
#include "guru/trainer_linear.hpp"
#include "guru/trainer_multiclass.hpp"

namespace {

const guru::Dataset& two_gauss() {
  static const guru::Dataset d = guru::gen_gaussian_toy(guru::ToyKind::TwoGauss, 200, 1).train;
  return d;
}

// One pass over the 200-sample toy per benchmark iteration.
void BM_GuruEpoch(benchmark::State& state) {
  guru::TrainConfig cfg;
  cfg.max_iters = two_gauss().size();
  cfg.eval_period = cfg.max_iters;
  for (auto _ : state) benchmark::DoNotOptimize(guru::train_guru(two_gauss(), 0.5, cfg));
}
BENCHMARK(BM_GuruEpoch)->Unit(benchmark::kMicrosecond);

void BM_MGuruEpoch(benchmark::State& state) {
  static const guru::Dataset data = guru::gen_gaussian_toy(guru::ToyKind::ThreeGauss, 200, 1).train;
  guru::TrainConfig cfg;
  cfg.max_iters = data.size();
  cfg.eval_period = cfg.max_iters;
  for (auto _ : state) benchmark::DoNotOptimize(guru::train_m_guru(data, 1.0, cfg));
}
BENCHMARK(BM_MGuruEpoch)->Unit(benchmark::kMicrosecond);

void BM_KenGuruStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto data = std::make_shared<const guru::Dataset>(guru::gen_radial_ring(n, 1));
  guru::KernelModel model(data, guru::KernelSpec::rbf(0.5), 1.0);
  guru::Rng rng(2);
  std::size_t t = 0;
  for (auto _ : state) guru::ken_guru_step(model, rng.uniform_index(n), ++t, 1.0);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_KenGuruStep)->Arg(200)->Arg(1000);

void BM_GramMatrix(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const guru::Dataset data = guru::gen_radial_ring(n, 1);
  const auto kernel = guru::KernelSpec::rbf(0.5);
  for (auto _ : state) benchmark::DoNotOptimize(guru::gram_matrix(data, kernel));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GramMatrix)->Arg(100)->Arg(200)->Arg(400)->Complexity(benchmark::oNSquared)
    ->Unit(benchmark::kMicrosecond);

void BM_BatchRefine(benchmark::State& state) {
  const auto start = guru::train_guru(two_gauss(), 0.5, guru::TrainConfig{}).final_model;
  for (auto _ : state) {
    benchmark::DoNotOptimize(guru::batch_refine(two_gauss(), 0.5, start, 1e-8, 200));
  }
}
BENCHMARK(BM_BatchRefine)->Unit(benchmark::kMicrosecond);

}  // namespace
