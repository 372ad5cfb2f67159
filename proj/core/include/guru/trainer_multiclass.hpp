#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "guru/data_io.hpp"
#include "guru/robust_loss.hpp"
#include "guru/trainer_linear.hpp"

namespace guru {

struct MulticlassTrainReport {
  MulticlassModel final_model;
  std::vector<ObjectivePoint> objective_trace;
  std::size_t iterations_run = 0;
  bool converged = false;
  std::size_t vector_updates = 0;  // single class-vector updates performed

  friend bool operator==(const MulticlassTrainReport&, const MulticlassTrainReport&) = default;
};

/// Sum of multiclass_sum_loss over the dataset.
double multiclass_objective(const MulticlassModel& model, const Dataset& data);

/// Gradient step on every class vector for each sampled point.
MulticlassTrainReport train_m_guru(const Dataset& data, double sigma, const TrainConfig& cfg);

/// Each iteration draws a sample, then one class uniformly from 1..C, and
/// updates only that class vector.
MulticlassTrainReport train_m_guru_s2(const Dataset& data, double sigma, const TrainConfig& cfg);

/// argmax_c w_c.x, lowest class on ties.
int multiclass_predict(const MulticlassModel& model, std::span<const double> x);
double multiclass_accuracy(const MulticlassModel& model, const Dataset& data);

/// max(0, max_{c != y} [1 - (w_y - w_c).x + delta ||w_y - w_c||]).
double multiclass_asvc_loss(const MulticlassModel& model, double delta,
                            std::span<const double> x, int y);

}  // namespace guru
