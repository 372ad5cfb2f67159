#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <stdexcept>

#include "guru/data_io.hpp"
#include "guru/error.hpp"
#include "guru/rng.hpp"
#include "guru/trainer_kernel.hpp"
#include "guru/trainer_linear.hpp"
#include "oracles.hpp"

namespace guru {
namespace {

std::shared_ptr<const Dataset> toy(std::size_t n_per_split, std::uint64_t seed) {
  return std::make_shared<const Dataset>(gen_gaussian_toy(ToyKind::TwoGauss, n_per_split, seed).train);
}

std::vector<Vector> probe_grid(std::size_t side, double lo, double hi) {
  std::vector<Vector> pts;
  for (std::size_t i = 0; i < side; ++i) {
    for (std::size_t j = 0; j < side; ++j) {
      const double h = (hi - lo) / static_cast<double>(side - 1);
      pts.push_back({lo + h * static_cast<double>(i), lo + h * static_cast<double>(j)});
    }
  }
  return pts;
}

double recomputed_nu(KernelModel& model) {
  const auto gram = gram_matrix(model.train(), model.kernel());
  return oracle::representer_norm(model.alphas(), model.train().labels(), gram);
}

TEST(KernelSpec, ParseAndPrintRoundTrip) {
  for (const auto& k : {KernelSpec::linear(), KernelSpec::polynomial(3, 0.25), KernelSpec::rbf(0.1)}) {
    EXPECT_EQ(KernelSpec::parse(k.to_string()), k);
  }
  EXPECT_EQ(KernelSpec::parse("poly:2"), KernelSpec::polynomial(2, 1.0));
  EXPECT_THROW(KernelSpec::parse("rbf:-1"), std::invalid_argument);
  EXPECT_THROW(KernelSpec::parse("poly:0:1"), std::invalid_argument);
  EXPECT_THROW(KernelSpec::parse("sigmoid"), std::invalid_argument);
}

TEST(GramMatrix, Examples) {
  const Dataset basis("b", {{1.0, 0.0}, {0.0, 1.0}}, {1, -1}, TaskType::Binary);
  EXPECT_EQ(gram_matrix(basis, KernelSpec::linear()), (std::vector<double>{1, 0, 0, 1}));
  const Dataset same("s", {{1.0, 1.0}, {1.0, 1.0}}, {1, -1}, TaskType::Binary);
  EXPECT_EQ(gram_matrix(same, KernelSpec::polynomial(2, 1.0)), (std::vector<double>{9, 9, 9, 9}));
  EXPECT_EQ(gram_matrix(same, KernelSpec::rbf(1.0)), (std::vector<double>{1, 1, 1, 1}));
  EXPECT_THROW(gram_matrix(Dataset(), KernelSpec::linear()), DataError);
}

TEST(GramMatrix, SymmetricWithKernelDiagonalAndCachedModeAgrees) {
  const auto data = toy(60, 4);
  for (const auto& k : {KernelSpec::linear(), KernelSpec::polynomial(2, 1.0), KernelSpec::rbf(0.5)}) {
    const auto full = gram_matrix(*data, k);
    const std::size_t m = data->size();
    GramMatrix cached(data, k, /*full_limit=*/0, /*cache_rows=*/3);
    EXPECT_FALSE(cached.is_full());
    for (std::size_t i = 0; i < m; ++i) {
      EXPECT_EQ(full[i * m + i], k(data->x(i), data->x(i)));
      EXPECT_GE(full[i * m + i], 0.0);
      for (std::size_t j = 0; j < m; ++j) EXPECT_EQ(full[i * m + j], full[j * m + i]);
    }
    for (std::size_t i : {5u, 0u, 17u, 5u, 59u, 0u}) {
      const auto row = cached.row(i);
      for (std::size_t j = 0; j < m; ++j) ASSERT_EQ(row[j], full[i * m + j]);
    }
    if (k.kind == KernelSpec::Kind::Linear) {
      EXPECT_EQ(full[1], dot(data->x(0), data->x(1)));
    }
  }
}

TEST(KenGuruStep, FirstStepFromZero) {
  const auto data = toy(10, 2);
  KernelModel model(data, KernelSpec::rbf(1.0), 0.5);
  EXPECT_EQ(model.nu(), 0.0);
  ken_guru_step(model, 3, 1, 0.7);
  for (std::size_t m = 0; m < model.size(); ++m) EXPECT_EQ(model.alpha(m), m == 3 ? 0.7 : 0.0);
  EXPECT_NEAR(model.nu(), 0.7, 1e-15);  // K_ii = 1 for RBF
  EXPECT_THROW(ken_guru_step(model, 99, 2, 0.7), std::out_of_range);
  EXPECT_THROW(ken_guru_step(model, 0, 0, 0.7), std::invalid_argument);
}

TEST(KenGuruStep, NuTracksRecomputationEveryStep) {
  const auto data = toy(40, 5);
  KernelModel model(data, KernelSpec::polynomial(2, 1.0), 0.5);
  Rng rng(3);
  for (std::size_t t = 1; t <= 300; ++t) {
    ken_guru_step(model, rng.uniform_index(data->size()), t, 1.0);
    const double exact = recomputed_nu(model);
    ASSERT_NEAR(model.nu(), exact, 1e-9 * exact) << "step " << t;
  }
}

TEST(KenGuruStep, NuDriftAfterManySteps) {
  const auto data = toy(100, 6);
  ASSERT_EQ(data->size(), 100u);
  KernelModel model(data, KernelSpec::rbf(1.0), 0.5);
  Rng rng(1);
  for (std::size_t t = 1; t <= 100000; ++t) {
    ken_guru_step(model, rng.uniform_index(data->size()), t, 1.0);
    if (t == 10000 || t == 100000) {
      const double exact = recomputed_nu(model);
      EXPECT_LT(std::abs(model.nu() - exact) / exact, 1e-6) << "after " << t;
    }
  }
  for (double a : model.alphas()) EXPECT_TRUE(std::isfinite(a));
}

TEST(KenGuruStep, NoOpRegion) {
  const auto c = guru_step_coefficients(-200.0, 50.0, 0.1, 1.0);
  EXPECT_NEAR(c.gamma, 1.0, 1e-300);
  EXPECT_LT(c.mu, 1e-300);
}

TEST(KenGuru, LinearKernelTracksGuruStepByStep) {
  const auto data = toy(100, 7);
  const double sigma = 0.5;
  KernelModel km(data, KernelSpec::linear(), sigma);
  Vector w(2, 0.0);
  Rng rng(11);
  for (std::size_t t = 1; t <= 5000; ++t) {
    const std::size_t i = rng.uniform_index(data->size());
    const int y = data->y(i);
    const auto c = guru_step_coefficients(1.0 - y * dot(w, data->x(i)), norm(w), sigma,
                                          learning_rate(1.0, t));
    scale(c.gamma, w);
    axpy(c.mu * y, data->x(i), w);
    ken_guru_step(km, i, t, 1.0);
    if (t % 500 == 0) {
      Vector implied(2, 0.0);
      for (std::size_t m = 0; m < km.size(); ++m) axpy(km.alpha(m) * data->y(m), data->x(m), implied);
      for (std::size_t k = 0; k < 2; ++k) ASSERT_NEAR(implied[k], w[k], 1e-10 * (1.0 + norm(w)));
      ASSERT_NEAR(km.nu(), norm(w), 1e-10 * norm(w));
    }
  }
}

TEST(KenGuru, LinearKernelMatchesGuruOnProbeGrid) {
  const auto data = toy(200, 1);
  const TrainConfig cfg;
  const auto primal = train_guru(*data, 0.5, cfg);
  auto dual = train_ken_guru(*data, KernelSpec::linear(), 0.5, cfg);
  EXPECT_EQ(dual.iterations_run, primal.iterations_run);
  const auto grid = probe_grid(20, -4.0, 4.0);
  ASSERT_EQ(grid.size(), 400u);
  const Vector values = kernel_predict_batch(dual.model, grid);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    ASSERT_NEAR(values[p], primal.final_model.decision(grid[p]), 1e-8) << "probe " << p;
    ASSERT_EQ(values[p], kernel_predict(dual.model, grid[p]));
  }
}

TEST(KenGuru, Deterministic) {
  const auto data = toy(50, 8);
  const auto a = train_ken_guru(*data, KernelSpec::rbf(1.0), 0.5, TrainConfig{});
  const auto b = train_ken_guru(*data, KernelSpec::rbf(1.0), 0.5, TrainConfig{});
  EXPECT_EQ(a.model.alphas(), b.model.alphas());
  EXPECT_EQ(a.objective_trace, b.objective_trace);
}

TEST(KenGuru, RadialRingWithQuadraticKernel) {
  const auto ring = std::make_shared<const Dataset>(gen_radial_ring(200, 1));
  auto report = train_ken_guru(*ring, KernelSpec::polynomial(2, 1.0), 0.5, TrainConfig{});
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ring->size(); ++i) {
    hits += (kernel_predict(report.model, ring->x(i)) >= 0.0 ? 1 : -1) == ring->y(i);
  }
  EXPECT_GE(static_cast<double>(hits) / static_cast<double>(ring->size()), 0.95);
}

TEST(KenGuru, LargerSigmaGivesSmootherRbfBoundary) {
  const auto data = toy(20, 3);
  const auto sign_changes = [&](double sigma) {
    TrainConfig cfg;
    cfg.epsilon = 1e-6;
    auto rep = train_ken_guru(*data, KernelSpec::rbf(1.0), sigma, cfg);
    int changes = 0;
    double prev = 0.0;
    for (int k = 0; k <= 2000; ++k) {
      const double s = -5.0 + 10.0 * k / 2000.0;
      const double v = kernel_predict(rep.model, Vector{s, 0.5 * s});
      if (k > 0 && (v >= 0.0) != (prev >= 0.0)) ++changes;
      prev = v;
    }
    return changes;
  };
  int previous = sign_changes(1.0 / 64.0);
  const int first = previous;
  for (double sigma : {0.25, 1.0, 4.0}) {
    const int c = sign_changes(sigma);
    EXPECT_LE(c, previous) << "sigma=" << sigma;
    previous = c;
  }
  EXPECT_LT(previous, first);
}

TEST(KernelPredict, Examples) {
  const auto data = std::make_shared<const Dataset>(
      Dataset("d", {{1.0, 2.0}, {-1.0, 0.5}}, {1, -1}, TaskType::Binary));
  const KernelModel only_first(data, KernelSpec::linear(), 1.0, Vector{1.0, 0.0});
  EXPECT_EQ(kernel_predict(only_first, Vector{3.0, -1.0}), 1.0);
  const KernelModel zero(data, KernelSpec::rbf(1.0), 1.0);
  EXPECT_EQ(kernel_predict(zero, Vector{3.0, -1.0}), 0.0);
  const KernelModel mixed(data, KernelSpec::linear(), 1.0, Vector{0.3, 0.9});
  const Vector w{0.3 * 1.0 - 0.9 * -1.0, 0.3 * 2.0 - 0.9 * 0.5};
  EXPECT_NEAR(kernel_predict(mixed, Vector{0.7, -2.0}), dot(w, Vector{0.7, -2.0}), 1e-10);
  EXPECT_NEAR(mixed.nu(), norm(w), 1e-12);
  EXPECT_THROW(kernel_predict(mixed, Vector{1.0}), DimensionError);
}

TEST(KernelObjective, MatchesPrimalForLinearKernel) {
  const auto data = toy(50, 9);
  const auto primal = train_guru(*data, 0.5, TrainConfig{});
  auto dual = train_ken_guru(*data, KernelSpec::linear(), 0.5, TrainConfig{});
  EXPECT_NEAR(kernel_objective(dual.model), robust_objective(primal.final_model, *data), 1e-8);
}

}  // namespace
}  // namespace guru
