#include <benchmark/benchmark.h>

#include <random>

#include "guru/math_core.hpp"
#include "guru/robust_loss.hpp"

namespace {

std::vector<double> draws(std::size_t n, double lo, double hi) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& e : v) e = u(gen);
  return v;
}

void BM_GaussCdf(benchmark::State& state) {
  const auto z = draws(1024, -8.0, 8.0);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(guru::gauss_cdf(z[i++ & 1023]));
}
BENCHMARK(BM_GaussCdf);

void BM_GaussCdfInv(benchmark::State& state) {
  const auto p = draws(1024, 1e-12, 1.0 - 1e-12);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(guru::gauss_cdf_inv(p[i++ & 1023]));
}
BENCHMARK(BM_GaussCdfInv);

void BM_RobustHinge(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto values = draws(2 * d, -1.0, 1.0);
  const guru::LinearModel model(guru::Vector(values.begin(), values.begin() + d), 0.5);
  const guru::Vector x(values.begin() + d, values.end());
  for (auto _ : state) benchmark::DoNotOptimize(guru::robust_hinge(model, x, 1));
}
BENCHMARK(BM_RobustHinge)->Arg(2)->Arg(64)->Arg(1024);

void BM_RobustHingeGradient(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto values = draws(2 * d, -1.0, 1.0);
  const guru::LinearModel model(guru::Vector(values.begin(), values.begin() + d), 0.5);
  const guru::Vector x(values.begin() + d, values.end());
  for (auto _ : state) benchmark::DoNotOptimize(guru::robust_hinge_gradient(model, x, -1));
}
BENCHMARK(BM_RobustHingeGradient)->Arg(2)->Arg(64)->Arg(1024);

void BM_ConjugateErf(benchmark::State& state) {
  const auto a = draws(1024, 1e-6, 1.0 - 1e-6);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(guru::conjugate_value(guru::ScalarLoss::ErfLoss, a[i++ & 1023]));
  }
}
BENCHMARK(BM_ConjugateErf);

}  // namespace
