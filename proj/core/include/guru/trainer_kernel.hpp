#pragma once

#include <cstddef>
#include <cstdint>
#include <list>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "guru/data_io.hpp"
#include "guru/trainer_linear.hpp"

namespace guru {

struct KernelSpec {
  enum class Kind { Linear, Polynomial, RBF };

  Kind kind = Kind::Linear;
  int degree = 2;       // Polynomial
  double offset = 1.0;  // Polynomial, >= 0
  double gamma = 1.0;   // RBF, > 0

  static KernelSpec linear() { return {}; }
  static KernelSpec polynomial(int degree, double offset) {
    return {Kind::Polynomial, degree, offset, 1.0};
  }
  static KernelSpec rbf(double gamma) { return {Kind::RBF, 2, 1.0, gamma}; }

  void validate() const;
  double operator()(std::span<const double> a, std::span<const double> b) const;

  /// "linear", "poly:<degree>:<offset>" or "rbf:<gamma>", lossless.
  std::string to_string() const;
  static KernelSpec parse(std::string_view text);

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// Kernel values over a training set. Sets up to `full_limit` samples are
/// precomputed in full (rows built in parallel); larger sets keep an LRU cache
/// of `cache_rows` rows. Not safe for concurrent access in cached mode.
class GramMatrix {
 public:
  GramMatrix(std::shared_ptr<const Dataset> data, KernelSpec kernel,
             std::size_t full_limit = 8192, std::size_t cache_rows = 2048);

  std::size_t size() const { return data_->size(); }
  bool is_full() const { return !full_.empty() || size() == 0; }
  double diag(std::size_t i) const { return diag_[i]; }
  /// Row i (symmetric, so also column i). The span stays valid until the next
  /// row() call in cached mode.
  std::span<const double> row(std::size_t i);
  double operator()(std::size_t i, std::size_t j);

 private:
  std::vector<double> compute_row(std::size_t i) const;

  std::shared_ptr<const Dataset> data_;
  KernelSpec kernel_;
  Vector diag_;
  std::vector<double> full_;
  std::size_t cache_rows_;
  std::list<std::pair<std::size_t, std::vector<double>>> lru_;
  std::unordered_map<std::size_t, decltype(lru_)::iterator> index_;
};

/// Dense row-major M x M Gram matrix.
std::vector<double> gram_matrix(const Dataset& data, const KernelSpec& kernel);

/// Kernel classifier w = sum_m alpha_m y_m phi(x_m). The alphas are stored as
/// raw values times a global scale so repeated shrinking cannot underflow.
class KernelModel {
 public:
  KernelModel(std::shared_ptr<const Dataset> train, KernelSpec kernel, double sigma);
  /// Model with explicit coefficients; nu is computed from the Gram matrix.
  KernelModel(std::shared_ptr<const Dataset> train, KernelSpec kernel, double sigma,
              Vector alphas);
  /// Restores a saved model without touching the Gram matrix.
  static KernelModel restore(std::shared_ptr<const Dataset> train, KernelSpec kernel,
                             double sigma, Vector alphas, double nu);

  const KernelSpec& kernel() const { return kernel_; }
  double sigma() const { return sigma_; }
  double nu() const { return nu_; }
  std::size_t size() const { return raw_.size(); }
  const Dataset& train() const { return *train_; }
  std::shared_ptr<const Dataset> train_ptr() const { return train_; }

  double alpha(std::size_t m) const { return scale_ * raw_[m]; }
  Vector alphas() const;

  /// sum_m alpha_m y_m K(x_m, x)
  double decision(std::span<const double> x) const;
  /// Decision values for every training sample via the Gram matrix.
  Vector train_decisions();

  GramMatrix& gram();

  /// Folds the global scale into the stored coefficients, so a model rebuilt
  /// from alphas() evaluates bit-identically.
  void fold_scale();

  friend void ken_guru_step(KernelModel& model, std::size_t i, std::size_t t, double eta0);

 private:
  std::shared_ptr<const Dataset> train_;
  KernelSpec kernel_;
  double sigma_;
  Vector raw_;
  double scale_ = 1.0;
  double nu_ = 0.0;
  std::shared_ptr<GramMatrix> gram_;
};

/// One KEN-GURU update on training sample i (0-based) at iteration t >= 1:
/// zeta = sum_m alpha_m y_m K_mi, then alpha <- gamma*alpha, alpha_i += mu, and
/// nu^2 <- gamma^2 nu^2 + 2 gamma mu y_i zeta + mu^2 K_ii. O(M) per call.
void ken_guru_step(KernelModel& model, std::size_t i, std::size_t t, double eta0);

double kernel_predict(const KernelModel& model, std::span<const double> x);
/// Decision values for many points, evaluated in parallel.
Vector kernel_predict_batch(const KernelModel& model, const std::vector<Vector>& points);

/// Robust objective evaluated through kernel expansions (O(M^2)).
double kernel_objective(KernelModel& model);

struct KernelTrainReport {
  KernelModel model;
  std::vector<ObjectivePoint> objective_trace;
  std::size_t iterations_run = 0;
  bool converged = false;
};

/// Same sampling stream, schedule and stopping rule as train_guru.
KernelTrainReport train_ken_guru(const Dataset& data, const KernelSpec& kernel, double sigma,
                                 const TrainConfig& cfg);

}  // namespace guru
