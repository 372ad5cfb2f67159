#include "guru/trainer_multiclass.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "guru/error.hpp"
#include "guru/rng.hpp"

namespace guru {

double multiclass_objective(const MulticlassModel& model, const Dataset& data) {
  require_same_dim(model.dim(), data.dim(), "multiclass_objective");
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) total += multiclass_sum_loss(model, data.x(i), data.y(i));
  return total;
}

namespace {

void require_multiclass(const Dataset& data, const char* what) {
  if (data.empty()) throw DataError(std::string(what) + ": dataset has no samples");
  if (data.task() != TaskType::Multiclass) {
    throw DataError(std::string(what) + ": dataset is not a multiclass task");
  }
  if (data.num_classes() < 2) {
    throw DataError(std::string(what) + ": at least 2 classes are required");
  }
}

template <class Step>
MulticlassTrainReport run_multiclass_sgd(const Dataset& data, double sigma, const TrainConfig& cfg,
                                         Step step) {
  cfg.validate();
  MulticlassTrainReport report{
      MulticlassModel::zeros(static_cast<std::size_t>(data.num_classes()), data.dim(), sigma), {},
      0, false, 0};
  MulticlassModel& model = report.final_model;
  Rng rng(cfg.seed);
  double previous = multiclass_objective(model, data);
  report.objective_trace.push_back({0, previous});
  std::size_t t = 0;
  while (t < cfg.max_iters) {
    ++t;
    report.vector_updates += step(model, rng, learning_rate(cfg.eta0, t));
    if (t % cfg.eval_period == 0 || t == cfg.max_iters) {
      const double current = multiclass_objective(model, data);
      if (!std::isfinite(current)) {
        throw TrainingError("objective became non-finite at iteration " + std::to_string(t) +
                            "; lower eta0");
      }
      report.objective_trace.push_back({t, current});
      if (objective_settled(previous, current, cfg.epsilon)) {
        report.converged = true;
        break;
      }
      previous = current;
    }
  }
  report.iterations_run = t;
  return report;
}

}  // namespace

MulticlassTrainReport train_m_guru(const Dataset& data, double sigma, const TrainConfig& cfg) {
  require_multiclass(data, "train_m_guru");
  const int classes = data.num_classes();
  return run_multiclass_sgd(data, sigma, cfg, [&](MulticlassModel& model, Rng& rng, double eta) {
    const auto i = static_cast<std::size_t>(rng.uniform_index(data.size()));
    const auto grads = multiclass_sum_gradients(model, data.x(i), data.y(i));
    for (int c = 1; c <= classes; ++c) axpy(-eta, grads[static_cast<std::size_t>(c - 1)], model.mutable_w(c));
    return static_cast<std::size_t>(classes);
  });
}

MulticlassTrainReport train_m_guru_s2(const Dataset& data, double sigma, const TrainConfig& cfg) {
  require_multiclass(data, "train_m_guru_s2");
  const auto classes = static_cast<std::uint64_t>(data.num_classes());
  return run_multiclass_sgd(data, sigma, cfg, [&](MulticlassModel& model, Rng& rng, double eta) {
    const auto i = static_cast<std::size_t>(rng.uniform_index(data.size()));
    const int r = static_cast<int>(rng.uniform_index(classes)) + 1;
    const Vector g = multiclass_sum_gradient(model, data.x(i), data.y(i), r);
    axpy(-eta, g, model.mutable_w(r));
    return std::size_t{1};
  });
}

int multiclass_predict(const MulticlassModel& model, std::span<const double> x) {
  require_same_dim(model.dim(), x.size(), "multiclass_predict");
  int best = 1;
  double best_score = dot(model.w(1), x);
  for (int c = 2; c <= static_cast<int>(model.num_classes()); ++c) {
    const double s = dot(model.w(c), x);
    if (s > best_score) {
      best_score = s;
      best = c;
    }
  }
  return best;
}

double multiclass_accuracy(const MulticlassModel& model, const Dataset& data) {
  if (data.empty()) throw DataError("accuracy of an empty dataset");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    hits += multiclass_predict(model, data.x(i)) == data.y(i) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

double multiclass_asvc_loss(const MulticlassModel& model, double delta,
                            std::span<const double> x, int y) {
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be non-negative");
  const auto wy = model.w(y);
  require_same_dim(model.dim(), x.size(), "multiclass_asvc_loss");
  double worst = 0.0;  // self term
  for (int c = 1; c <= static_cast<int>(model.num_classes()); ++c) {
    if (c == y) continue;
    const Vector dw = subtract(wy, model.w(c));
    worst = std::max(worst, 1.0 - dot(dw, x) + delta * norm(dw));
  }
  return worst;
}

}  // namespace guru
