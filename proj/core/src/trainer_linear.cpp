#include "guru/trainer_linear.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dense.hpp"
#include "guru/error.hpp"
#include "guru/math_core.hpp"
#include "guru/rng.hpp"

namespace guru {

void TrainConfig::validate() const {
  if (!(eta0 > 0.0) || !std::isfinite(eta0)) throw std::invalid_argument("eta0 must be positive");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (eval_period < 1) throw std::invalid_argument("eval_period must be at least 1");
}

double learning_rate(double eta0, std::size_t t) {
  return eta0 / std::sqrt(static_cast<double>(t));
}

StepCoefficients guru_step_coefficients(double u, double w_norm, double sigma, double eta) {
  const double s = sigma * w_norm;
  const double z = u / s;
  if (!(s > 0.0) || !std::isfinite(z)) {
    return {1.0, eta * (u > 0.0 ? 1.0 : (u < 0.0 ? 0.0 : 0.5))};
  }
  return {1.0 - eta * sigma * gauss_pdf(z) / w_norm, eta * gauss_cdf(z)};
}

bool objective_settled(double previous, double current, double epsilon) {
  return std::abs(previous - current) < epsilon * (1.0 + std::abs(current));
}

double robust_objective(const LinearModel& model, const Dataset& data) {
  require_same_dim(model.dim(), data.dim(), "robust_objective");
  const double scale = model.sigma() * model.norm();
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    total += robust_hinge_from_margin(scale, 1.0 - data.y(i) * model.decision(data.x(i)));
  }
  return total;
}

Vector robust_objective_gradient(const LinearModel& model, const Dataset& data) {
  require_same_dim(model.dim(), data.dim(), "robust_objective_gradient");
  Vector g(model.dim(), 0.0);
  const double n = model.norm();
  for (std::size_t i = 0; i < data.size(); ++i) {
    accumulate_robust_hinge_gradient(model.w(), n, model.sigma(), data.x(i), data.y(i), 1.0, g);
  }
  return g;
}

double svm_objective(std::span<const double> w, double lambda, const Dataset& data) {
  require_same_dim(w.size(), data.dim(), "svm_objective");
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) total += hinge(w, data.x(i), data.y(i));
  return total + 0.5 * lambda * squared_norm(w);
}

double asvc_objective(std::span<const double> w, double delta, double lambda, const Dataset& data) {
  require_same_dim(w.size(), data.dim(), "asvc_objective");
  const double pad = delta * norm(w);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    total += std::max(0.0, 1.0 - data.y(i) * dot(w, data.x(i)) + pad);
  }
  return total + 0.5 * lambda * squared_norm(w);
}

int predict_label(std::span<const double> w, std::span<const double> x) {
  return dot(w, x) >= 0.0 ? 1 : -1;
}

double accuracy(std::span<const double> w, const Dataset& data) {
  if (data.empty()) throw DataError("accuracy of an empty dataset");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    hits += predict_label(w, data.x(i)) == data.y(i) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

namespace {

// Shared SGD driver. `step(w, i, eta)` applies one update for sample i;
// `objective(w)` is the full objective used by the stopping rule.
template <class Step, class Objective>
TrainReport run_sgd(const Dataset& data, double sigma, const TrainConfig& cfg, Step step,
                    Objective objective) {
  cfg.validate();
  Vector w(data.dim(), 0.0);
  Rng rng(cfg.seed);
  TrainReport report{LinearModel(w, sigma), {}, 0, false};
  double previous = objective(w);
  report.objective_trace.push_back({0, previous});
  std::size_t t = 0;
  while (t < cfg.max_iters) {
    ++t;
    step(w, static_cast<std::size_t>(rng.uniform_index(data.size())), learning_rate(cfg.eta0, t));
    if (t % cfg.eval_period == 0 || t == cfg.max_iters) {
      const double current = objective(w);
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
  report.final_model = LinearModel(std::move(w), sigma);
  return report;
}

}  // namespace

TrainReport train_guru(const Dataset& data, double sigma, const TrainConfig& cfg) {
  data.require_binary("train_guru");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  return run_sgd(
      data, sigma, cfg,
      [&](Vector& w, std::size_t i, double eta) {
        const int y = data.y(i);
        const auto c = guru_step_coefficients(1.0 - y * dot(w, data.x(i)), norm(w), sigma, eta);
        scale(c.gamma, w);
        axpy(c.mu * y, data.x(i), w);
      },
      [&](const Vector& w) { return robust_objective(LinearModel(w, sigma), data); });
}

TrainReport train_baseline_svm(const Dataset& data, double lambda, const TrainConfig& cfg) {
  data.require_binary("train_baseline_svm");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  const double share = lambda / static_cast<double>(data.size());
  return run_sgd(
      data, 1.0, cfg,
      [&](Vector& w, std::size_t i, double eta) {
        const int y = data.y(i);
        if (1.0 - y * dot(w, data.x(i)) > 0.0) axpy(eta * y, data.x(i), w);
        scale(1.0 / (1.0 + eta * share), w);
      },
      [&](const Vector& w) { return svm_objective(w, lambda, data); });
}

// ---------------------------------------------------------------------------

AsvcReport train_asvc_report(const Dataset& data, double delta, double lambda, std::size_t rounds,
                             const TrainConfig& cfg) {
  data.require_binary("train_asvc");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be >= 0");
  if (rounds < 1) throw std::invalid_argument("rounds must be at least 1");

  Vector best(data.dim(), 0.0);
  double best_objective = asvc_objective(best, delta, lambda, data);
  AsvcReport report{LinearModel(best, 1.0), {}, 0, 0, false};

  Vector previous;
  for (std::size_t round = 1; round <= rounds; ++round) {
    Dataset train = data;
    if (round > 1) {
      const double n = norm(previous);
      if (!(n > 0.0)) break;  // displacement undefined; nothing further to learn
      std::vector<Vector> xs = data.samples();
      for (std::size_t i = 0; i < xs.size(); ++i) {
        axpy(-data.y(i) * delta / n, previous, xs[i]);
      }
      train = data.with_samples(std::move(xs));
    }
    Vector w = train_baseline_svm(train, lambda, cfg).final_model.weights();
    const double objective = asvc_objective(w, delta, lambda, data);
    report.round_objectives.push_back(objective);
    report.rounds_run = round;
    if (objective < best_objective) {
      best_objective = objective;
      best = w;
      report.best_round = round;
    }
    if (round > 1) {
      const Vector diff = subtract(w, previous);
      if (norm(diff) <= 1e-6 * (1.0 + norm(previous))) {
        report.converged = true;
        break;
      }
    }
    previous = std::move(w);
  }
  report.model = LinearModel(std::move(best), 1.0);
  return report;
}

LinearModel train_asvc(const Dataset& data, double delta, double lambda, std::size_t rounds,
                       const TrainConfig& cfg) {
  return train_asvc_report(data, delta, lambda, rounds, cfg).model;
}

// ---------------------------------------------------------------------------

namespace {

// Row-major Hessian of the robust objective.
std::vector<double> robust_objective_hessian(const LinearModel& model, const Dataset& data) {
  const std::size_t d = model.dim();
  const double wn = model.norm();
  const double sigma = model.sigma();
  const double s = sigma * wn;
  Vector what(model.w().begin(), model.w().end());
  scale(1.0 / wn, what);
  std::vector<double> h(d * d, 0.0);
  double iso = 0.0;
  Vector v(d);
  for (std::size_t m = 0; m < data.size(); ++m) {
    const auto x = data.x(m);
    const int y = data.y(m);
    const double u = 1.0 - y * dot(model.w(), x);
    const double z = u / s;
    if (!std::isfinite(z)) continue;
    const double p = gauss_pdf(z);
    if (p == 0.0) continue;
    iso += p * sigma / wn;
    for (std::size_t i = 0; i < d; ++i) v[i] = y * x[i] + z * sigma * what[i];
    const double c = p / s;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) h[i * d + j] += c * v[i] * v[j];
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      h[i * d + j] += iso * ((i == j ? 1.0 : 0.0) - what[i] * what[j]);
    }
  }
  return h;
}

Vector newton_direction(const std::vector<double>& h, const Vector& g) {
  const std::size_t d = g.size();
  Vector rhs(g);
  scale(-1.0, rhs);
  double diag = 0.0;
  for (std::size_t i = 0; i < d; ++i) diag = std::max(diag, std::abs(h[i * d + i]));
  double ridge = 0.0;
  for (int attempt = 0; attempt < 40; ++attempt) {
    if (auto x = detail::cholesky_solve(h, rhs, d, ridge)) return *x;
    ridge = ridge == 0.0 ? 1e-12 * (1.0 + diag) : ridge * 10.0;
  }
  return rhs;
}

double checked_objective(const LinearModel& model, const Dataset& data) {
  const double p = robust_objective(model, data);
  if (!std::isfinite(p)) throw TrainingError("batch_refine: non-finite objective");
  return p;
}

}  // namespace

RefineResult batch_refine(const Dataset& data, double sigma, const LinearModel& model,
                          double grad_tol, std::size_t max_iters, const RefineObserver& observer) {
  data.require_binary("batch_refine");
  require_same_dim(model.dim(), data.dim(), "batch_refine");
  if (!(model.norm() > 0.0)) throw std::invalid_argument("batch_refine needs a nonzero start");
  if (!(grad_tol > 0.0)) throw std::invalid_argument("grad_tol must be positive");

  LinearModel current(model.weights(), sigma);
  double objective = checked_objective(current, data);
  Vector g = robust_objective_gradient(current, data);
  double gnorm = norm(g);
  RefineResult result{current, gnorm, 0, gnorm <= grad_tol};
  if (observer) observer(current, 0, gnorm);

  for (std::size_t it = 1; it <= max_iters && gnorm > grad_tol; ++it) {
    const auto h = robust_objective_hessian(current, data);
    bool accepted = false;
    for (int mode = 0; mode < 2 && !accepted; ++mode) {
      Vector dir = mode == 0 ? newton_direction(h, g) : g;
      if (mode == 1) scale(-1.0 / std::max(1.0, gnorm), dir);
      const double slope = dot(g, dir);
      if (!(slope < 0.0)) continue;
      Vector trial_w(current.w().begin(), current.w().end());
      for (double t = 1.0; t > 1e-20; t *= 0.5) {
        trial_w.assign(current.w().begin(), current.w().end());
        axpy(t, dir, trial_w);
        if (!(norm(trial_w) > 0.0)) continue;
        if (!all_finite(trial_w)) continue;
        LinearModel trial(trial_w, sigma);
        const double value = robust_objective(trial, data);
        if (!std::isfinite(value)) continue;  // overshoot; backtrack
        bool take = value <= objective + 1e-4 * t * slope && value < objective;
        Vector trial_g;
        if (!take && t == 1.0 && value <= objective) {
          // Near the optimum the objective difference is below rounding; accept a
          // full step that still shrinks the gradient.
          trial_g = robust_objective_gradient(trial, data);
          take = norm(trial_g) < gnorm;
        }
        if (take) {
          current = std::move(trial);
          objective = value;
          g = trial_g.empty() ? robust_objective_gradient(current, data) : std::move(trial_g);
          gnorm = norm(g);
          accepted = true;
          break;
        }
      }
    }
    result.iterations = it;
    if (observer) observer(current, it, gnorm);
    if (!accepted) break;  // no direction makes progress at double precision
  }
  result.model = current;
  result.grad_norm = gnorm;
  result.reached_tol = gnorm <= grad_tol;
  return result;
}

}  // namespace guru
