#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "guru/data_io.hpp"
#include "guru/error.hpp"
#include "guru/math_core.hpp"
#include "guru/rng.hpp"
#include "guru/trainer_linear.hpp"
#include "oracles.hpp"

namespace guru {
namespace {

Dataset single_point() {
  return Dataset("one", {{1.0, 0.0}}, {1}, TaskType::Binary);
}

const Splits& two_gauss() {
  static const Splits s = gen_gaussian_toy(ToyKind::TwoGauss, 200, 1);
  return s;
}

// Two clusters at +-(2, 0) with every point at distance >= 1 from x_1 = 0.
Dataset separable_with_margin(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vector> xs;
  std::vector<int> ys;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = i % 2 ? 1 : -1;
    const double along = 1.0 + rng.uniform01() * 2.0;
    xs.push_back({y * along, rng.uniform(-2.0, 2.0)});
    ys.push_back(y);
  }
  return Dataset("margin", xs, ys, TaskType::Binary);
}

TEST(LearningRate, ExactSchedule) {
  EXPECT_EQ(learning_rate(1.0, 1), 1.0);
  EXPECT_EQ(learning_rate(2.0, 4), 1.0);
  EXPECT_EQ(learning_rate(0.3, 9), 0.3 / 3.0);
  for (std::size_t t = 1; t < 1000; t += 7) {
    EXPECT_EQ(learning_rate(0.7, t), 0.7 / std::sqrt(static_cast<double>(t)));
  }
}

TEST(GuruStep, MatchesGradientStep) {
  const Vector w{0.4, -1.2, 0.3};
  const Vector x{1.0, 0.5, -2.0};
  const double sigma = 0.6, eta = 0.25;
  for (int y : {-1, 1}) {
    Vector expect = w;
    Vector grad = robust_hinge_gradient(LinearModel(w, sigma), x, y);
    axpy(-eta, grad, expect);
    const auto c = guru_step_coefficients(1.0 - y * dot(w, x), norm(w), sigma, eta);
    Vector got = w;
    scale(c.gamma, got);
    axpy(c.mu * y, x, got);
    for (std::size_t k = 0; k < w.size(); ++k) EXPECT_NEAR(got[k], expect[k], 1e-15);
  }
  const auto zero = guru_step_coefficients(1.0, 0.0, 1.0, 0.5);
  EXPECT_EQ(zero.gamma, 1.0);
  EXPECT_EQ(zero.mu, 0.5);
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.eta0 = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.epsilon = -1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.max_iters = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.eval_period = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(TrainGuru, InputErrors) {
  const TrainConfig cfg;
  EXPECT_THROW(train_guru(Dataset(), 1.0, cfg), DataError);
  EXPECT_THROW(train_guru(single_point(), 0.0, cfg), std::invalid_argument);
  const Dataset multi("m", {{1.0}, {2.0}, {3.0}}, {1, 2, 3}, TaskType::Multiclass, 3);
  EXPECT_THROW(train_guru(multi, 1.0, cfg), DataError);
}

TEST(TrainGuru, SinglePointAgainstScalarOracle) {
  const double sigma = 0.1;
  TrainConfig cfg;
  cfg.max_iters = 100000;
  const auto report = train_guru(single_point(), sigma, cfg);
  const auto& w = report.final_model.weights();
  EXPECT_EQ(w[1], 0.0);  // updates never leave the span of x
  const double a = w[0];
  const double objective = robust_objective(report.final_model, single_point());

  // Along w = a e_1 the objective is g(a) = sigma a f((1 - a)/(sigma a)).
  const auto g = [sigma](double s) { return sigma * s * oracle::smooth_hinge((1.0 - s) / (sigma * s)); };
  const double best_a = oracle::golden_section_argmin(g, 0.5, 400.0);
  const double g_star = g(best_a);
  const double f_floor = g(1.0);  // margin exactly 1
  EXPECT_NEAR(f_floor, sigma * kInvSqrt2Pi, 1e-15);
  EXPECT_LT(g_star, 1e-20);
  EXPECT_GE(objective, g_star - 1e-15);
  EXPECT_LT(objective, 1e-3 * f_floor);
  EXPECT_GT(a, 1.0 - 3.0 * sigma * std::abs(a));
  EXPECT_GT(a, 1.0);
}

TEST(TrainGuru, DeterministicAcrossRuns) {
  TrainConfig cfg;
  cfg.seed = 77;
  const auto a = train_guru(two_gauss().train, 0.5, cfg);
  const auto b = train_guru(two_gauss().train, 0.5, cfg);
  EXPECT_EQ(a, b);
  cfg.seed = 78;
  EXPECT_NE(train_guru(two_gauss().train, 0.5, cfg).final_model, a.final_model);
}

TEST(TrainGuru, ObjectiveBelowZeroModelAndTraceFinite) {
  const auto& train = two_gauss().train;
  const auto report = train_guru(train, 0.5, TrainConfig{});
  const double at_zero = robust_objective(LinearModel::zeros(train.dim(), 0.5), train);
  EXPECT_EQ(at_zero, static_cast<double>(train.size()));
  EXPECT_LE(robust_objective(report.final_model, train), at_zero);
  ASSERT_FALSE(report.objective_trace.empty());
  EXPECT_EQ(report.objective_trace.front().iteration, 0u);
  EXPECT_EQ(report.objective_trace.front().objective, at_zero);
  for (const auto& p : report.objective_trace) EXPECT_TRUE(std::isfinite(p.objective));
  if (report.converged) {
    const auto n = report.objective_trace.size();
    ASSERT_GE(n, 2u);
    EXPECT_TRUE(objective_settled(report.objective_trace[n - 2].objective,
                                  report.objective_trace[n - 1].objective, 1e-4));
  }
}

TEST(TrainGuru, LateEvaluationsSettle) {
  TrainConfig cfg;
  cfg.epsilon = 1e-12;
  cfg.max_iters = 40000;
  cfg.eval_period = 1000;
  const auto report = train_guru(two_gauss().train, 0.5, cfg);
  const auto& trace = report.objective_trace;
  ASSERT_GE(trace.size(), 10u);
  double lo = trace.back().objective, hi = lo;
  for (std::size_t i = trace.size() - 10; i < trace.size(); ++i) {
    lo = std::min(lo, trace[i].objective);
    hi = std::max(hi, trace[i].objective);
  }
  EXPECT_LT((hi - lo) / hi, 0.05);
}

TEST(TrainGuru, ToyTestAccuracy) {
  const auto report = train_guru(two_gauss().train, 0.5, TrainConfig{});
  EXPECT_GE(accuracy(report.final_model.w(), two_gauss().test), 0.9);
}

TEST(TrainBaselineSvm, ToyAccuracyAndDeterminism) {
  TrainConfig cfg;
  const auto a = train_baseline_svm(two_gauss().train, 1.0, cfg);
  EXPECT_GE(accuracy(a.final_model.w(), two_gauss().test), 0.9);
  EXPECT_EQ(a, train_baseline_svm(two_gauss().train, 1.0, cfg));
  EXPECT_EQ(a.final_model.sigma(), 1.0);
  EXPECT_LE(svm_objective(a.final_model.w(), 1.0, two_gauss().train),
            svm_objective(Vector(2, 0.0), 1.0, two_gauss().train));
}

TEST(TrainBaselineSvm, HugeLambdaShrinksWeights) {
  const auto r = train_baseline_svm(two_gauss().train, 1e6, TrainConfig{});
  EXPECT_LE(r.final_model.norm(), 1e-2);
  EXPECT_THROW(train_baseline_svm(two_gauss().train, 0.0, TrainConfig{}), std::invalid_argument);
}

TEST(Objectives, SmallExamples) {
  const Dataset d("d", {{1.0, 0.0}, {0.0, 2.0}}, {1, -1}, TaskType::Binary);
  const Vector w{0.5, 0.5};
  EXPECT_EQ(svm_objective(w, 2.0, d), 0.5 + 2.0 + 0.5);
  EXPECT_NEAR(asvc_objective(w, 1.0, 0.0, d), (0.5 + std::sqrt(0.5)) + (2.0 + std::sqrt(0.5)), 1e-15);
  EXPECT_EQ(asvc_objective(Vector{0.0, 0.0}, 3.0, 1.0, d), 2.0);
  EXPECT_EQ(predict_label(Vector{0.0, 0.0}, Vector{1.0, 1.0}), 1);
  EXPECT_EQ(accuracy(w, d), 0.5);
}

TEST(RobustObjective, GradientMatchesFiniteDifferences) {
  const auto& train = two_gauss().train;
  const Vector w{0.8, -0.3};
  const auto obj = [&](std::span<const double> v) {
    return robust_objective(LinearModel(Vector(v.begin(), v.end()), 0.5), train);
  };
  const Vector fd = oracle::central_gradient(obj, w);
  const Vector g = robust_objective_gradient(LinearModel(w, 0.5), train);
  for (std::size_t k = 0; k < w.size(); ++k) EXPECT_NEAR(g[k], fd[k], 1e-6 * std::max(1.0, std::abs(fd[k])));
}

TEST(TrainAsvc, ZeroDeltaMatchesBaselineSvm) {
  const auto& train = two_gauss().train;
  const TrainConfig cfg;
  const auto svm = train_baseline_svm(train, 1.0, cfg);
  const auto asvc = train_asvc(train, 0.0, 1.0, 5, cfg);
  EXPECT_EQ(asvc.weights(), svm.final_model.weights());
  const auto rep = train_asvc_report(train, 0.0, 1.0, 5, cfg);
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.rounds_run, 2u);
}

TEST(TrainAsvc, SmallDeltaKeepsSeparableDataSeparated) {
  // Every point has |x_1| >= 1 so the geometric margin is at least 1.
  const Dataset data = separable_with_margin(200, 3);
  const auto svm = train_baseline_svm(data, 1e-3, TrainConfig{});
  ASSERT_EQ(accuracy(svm.final_model.w(), data), 1.0);
  const auto model = train_asvc(data, 0.4, 1e-3, 10);
  EXPECT_EQ(accuracy(model.w(), data), 1.0);
}

TEST(TrainAsvc, HugeDeltaShrinksNorm) {
  Dataset data = two_gauss().train;
  std::vector<Vector> unit;
  for (const auto& x : data.samples()) {
    Vector v = x;
    scale(1.0 / norm(v), v);
    unit.push_back(v);
  }
  data = data.with_samples(unit);
  const auto svm = train_baseline_svm(data, 1.0, TrainConfig{});
  const auto rep = train_asvc_report(data, 1e3, 1.0, 10);
  EXPECT_LT(rep.model.norm(), svm.final_model.norm());
  ASSERT_FALSE(rep.round_objectives.empty());
  const double best = asvc_objective(rep.model.w(), 1e3, 1.0, data);
  for (double v : rep.round_objectives) EXPECT_LE(best, v);
}

TEST(TrainAsvc, Errors) {
  EXPECT_THROW(train_asvc(two_gauss().train, -1.0, 1.0, 3), std::invalid_argument);
  EXPECT_THROW(train_asvc(two_gauss().train, 0.1, 1.0, 0), std::invalid_argument);
}

TEST(BatchRefine, ReachesToleranceFromSgdOutput) {
  const auto& train = two_gauss().train;
  const auto sgd = train_guru(train, 0.5, TrainConfig{});
  const double before = robust_objective(sgd.final_model, train);
  std::vector<double> seen;
  const auto r = batch_refine(train, 0.5, sgd.final_model, 1e-6, 200,
                              [&](const LinearModel& m, std::size_t, double) {
                                seen.push_back(robust_objective(m, train));
                              });
  EXPECT_TRUE(r.reached_tol);
  EXPECT_LE(r.grad_norm, 1e-6);
  EXPECT_LE(norm(robust_objective_gradient(r.model, train)), 1e-6);
  EXPECT_LE(robust_objective(r.model, train), before);
  for (std::size_t i = 1; i < seen.size(); ++i) EXPECT_LE(seen[i], seen[i - 1]);
}

TEST(BatchRefine, StationaryInputReturnsImmediately) {
  const auto& train = two_gauss().train;
  const auto sgd = train_guru(train, 0.5, TrainConfig{});
  const auto first = batch_refine(train, 0.5, sgd.final_model, 1e-9, 200);
  ASSERT_TRUE(first.reached_tol);
  const auto again = batch_refine(train, 0.5, first.model, 1e-9, 200);
  EXPECT_LE(again.iterations, 1u);
  EXPECT_TRUE(again.reached_tol);
}

TEST(BatchRefine, Errors) {
  const auto& train = two_gauss().train;
  EXPECT_THROW(batch_refine(train, 0.5, LinearModel::zeros(2, 0.5), 1e-6, 10), std::invalid_argument);
  EXPECT_THROW(batch_refine(train, 0.5, LinearModel({1.0, 0.0}, 0.5), 0.0, 10), std::invalid_argument);
}

}  // namespace
}  // namespace guru
