#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "guru/data_io.hpp"
#include "guru/robust_loss.hpp"

namespace guru {

struct TrainConfig {
  double eta0 = 1.0;
  double epsilon = 1e-4;
  std::size_t max_iters = 200000;
  std::uint64_t seed = 1;
  std::size_t eval_period = 2000;

  /// Throws std::invalid_argument on a non-positive field.
  void validate() const;
};

struct ObjectivePoint {
  std::size_t iteration;
  double objective;

  friend bool operator==(const ObjectivePoint&, const ObjectivePoint&) = default;
};

struct TrainReport {
  LinearModel final_model;
  std::vector<ObjectivePoint> objective_trace;
  std::size_t iterations_run = 0;
  bool converged = false;

  friend bool operator==(const TrainReport&, const TrainReport&) = default;
};

/// Step size at SGD update t (t counts from 1): eta0 / sqrt(t).
double learning_rate(double eta0, std::size_t t);

/// One GURU update written as w <- gamma*w + mu*y*x, where u = 1 - y w.x:
/// gamma = 1 - eta*sigma*pdf(z)/||w||, mu = eta*cdf(z), z = u/(sigma*||w||).
/// At ||w|| = 0 the limits gamma = 1, mu = eta*[u > 0] apply.
struct StepCoefficients {
  double gamma;
  double mu;
};
StepCoefficients guru_step_coefficients(double u, double w_norm, double sigma, double eta);

/// Stopping test shared by every stochastic trainer.
bool objective_settled(double previous, double current, double epsilon);

/// Sum of robust hinge losses over the dataset.
double robust_objective(const LinearModel& model, const Dataset& data);
Vector robust_objective_gradient(const LinearModel& model, const Dataset& data);

/// (lambda/2)||w||^2 + sum of hinge losses.
double svm_objective(std::span<const double> w, double lambda, const Dataset& data);

/// sum [1 - y w.x + delta ||w||]_+ + (lambda/2)||w||^2. At w = 0 every term is 1.
double asvc_objective(std::span<const double> w, double delta, double lambda, const Dataset& data);

/// Sign classifier, ties go to +1.
int predict_label(std::span<const double> w, std::span<const double> x);
double accuracy(std::span<const double> w, const Dataset& data);

/// Stochastic gradient descent on the robust objective, starting from w = 0.
/// Sample indices come from Rng(cfg.seed).uniform_index(M), one per update.
TrainReport train_guru(const Dataset& data, double sigma, const TrainConfig& cfg);

/// Hinge + L2 baseline with the same sampling and eta0/sqrt(t) schedule. Each
/// update is the proximal step on one sample's share of the objective, so very
/// large lambda stays stable. The returned model carries sigma = 1 as a
/// placeholder.
TrainReport train_baseline_svm(const Dataset& data, double lambda, const TrainConfig& cfg);

struct AsvcReport {
  LinearModel model;
  std::vector<double> round_objectives;  // asvc_objective after each round
  std::size_t best_round = 0;            // 0 means w = 0 beat every round
  std::size_t rounds_run = 0;
  bool converged = false;
};

/// Alternating solver for the ball-displacement adversary. Round 1 is a plain
/// SVM; each later round trains the SVM on x - y*delta*w/||w|| using the
/// previous round's w. Returns the round with the lowest asvc_objective.
AsvcReport train_asvc_report(const Dataset& data, double delta, double lambda, std::size_t rounds,
                             const TrainConfig& cfg = {});
LinearModel train_asvc(const Dataset& data, double delta, double lambda, std::size_t rounds,
                       const TrainConfig& cfg = {});

struct RefineResult {
  LinearModel model;
  double grad_norm = 0.0;
  std::size_t iterations = 0;
  bool reached_tol = false;
};

using RefineObserver = std::function<void(const LinearModel&, std::size_t iteration,
                                          double grad_norm)>;

/// Damped Newton with Armijo backtracking on the full robust objective, used
/// to reach the stationarity that dual certification needs. Falls back to the
/// gradient direction when the Newton direction is not a descent direction.
RefineResult batch_refine(const Dataset& data, double sigma, const LinearModel& model,
                          double grad_tol, std::size_t max_iters,
                          const RefineObserver& observer = {});

}  // namespace guru
