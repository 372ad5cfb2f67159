#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "guru/linalg.hpp"

namespace guru {

/// Binary linear classifier w together with the noise scale sigma (the
/// adversary's variance budget is sigma^2).
class LinearModel {
 public:
  LinearModel(Vector w, double sigma);
  static LinearModel zeros(std::size_t dim, double sigma) { return {Vector(dim, 0.0), sigma}; }

  std::span<const double> w() const { return w_; }
  std::span<double> mutable_w() { return w_; }
  const Vector& weights() const { return w_; }
  double sigma() const { return sigma_; }
  std::size_t dim() const { return w_.size(); }
  double norm() const { return guru::norm(w_); }
  double decision(std::span<const double> x) const { return dot(w_, x); }

  friend bool operator==(const LinearModel&, const LinearModel&) = default;

 private:
  Vector w_;
  double sigma_;
};

/// Plain hinge [1 - y w.x]_+.
double hinge(std::span<const double> w, std::span<const double> x, int y);

/// Worst-case expected hinge under trace-bounded Gaussian noise:
/// perspective(ErfLoss, sigma*||w||, 1 - y w.x). At w = 0 the removable limit
/// [1]_+ = 1 is returned.
double robust_hinge(const LinearModel& model, std::span<const double> x, int y);

/// Same loss expressed through the margin term u = 1 - y w.x and the noise
/// scale sigma*||w||. A zero or underflowing scale takes the hinge limit.
double robust_hinge_from_margin(double noise_scale, double u);

Vector robust_hinge_gradient(const LinearModel& model, std::span<const double> x, int y);

/// out += weight * gradient, without allocating. `w_norm` must equal ||w||.
void accumulate_robust_hinge_gradient(std::span<const double> w, double w_norm, double sigma,
                                      std::span<const double> x, int y, double weight,
                                      std::span<double> out);

// ---------------------------------------------------------------------------
// Adversarial covariance choices

enum class CovarianceConstraint {
  TraceBound,          // PSD, trace <= budget
  SpectralBound,       // PSD, largest eigenvalue <= budget
  DiagonalTraceBound,  // diagonal PSD, trace <= budget
};

/// A d x d covariance stored in factored form: budget * u u^T (rank one),
/// budget * I, or budget * e_k e_k^T.
class CovarianceChoice {
 public:
  enum class Form { RankOne, ScaledIdentity, SingleAxis };

  static CovarianceChoice rank_one(CovarianceConstraint constraint, double budget,
                                   std::span<const double> direction);
  static CovarianceChoice scaled_identity(double budget, std::size_t dim);
  static CovarianceChoice single_axis(double budget, std::size_t dim, std::size_t axis);

  CovarianceConstraint constraint() const { return constraint_; }
  Form form() const { return form_; }
  double budget() const { return budget_; }
  std::size_t dim() const { return dim_; }
  std::size_t axis() const { return axis_; }
  std::span<const double> direction() const { return direction_; }

  double entry(std::size_t i, std::size_t j) const;
  /// Row-major dense copy.
  std::vector<double> dense() const;
  double trace() const;
  /// v^T Sigma v
  double quadratic_form(std::span<const double> v) const;

 private:
  CovarianceChoice() = default;

  CovarianceConstraint constraint_ = CovarianceConstraint::TraceBound;
  Form form_ = Form::RankOne;
  double budget_ = 0.0;
  std::size_t dim_ = 0;
  std::size_t axis_ = 0;
  Vector direction_;
};

/// Covariance maximizing w^T Sigma w over the constraint set:
/// budget * w w^T / ||w||^2 (trace), budget * I (spectral), budget * e_k e_k^T
/// with k = argmax w_k^2, lowest index on ties (diagonal).
CovarianceChoice adversarial_covariance(CovarianceConstraint constraint, double budget,
                                        std::span<const double> w);

/// Randomized optimality check: true iff w^T Sigma* w >= w^T Sigma w - 1e-10 for
/// `trials` random PSD challengers drawn from the same constraint set.
bool adversarial_covariance_is_optimal(const CovarianceChoice& choice, std::span<const double> w,
                                       std::size_t trials, std::uint64_t seed = 7);

// ---------------------------------------------------------------------------
// Single-point (ball displacement) adversary

/// Worst displacement inside the delta-ball for a positive-label point: -delta * w / ||w||.
Vector asvc_displacement(std::span<const double> w, double delta);

/// [1 - y w.x + delta ||w||]_+
double asvc_robust_hinge(std::span<const double> w, double delta, std::span<const double> x,
                         int y);

// ---------------------------------------------------------------------------
// Multiclass sum-of-hinges

class MulticlassModel {
 public:
  MulticlassModel(std::vector<Vector> weights, double sigma);
  static MulticlassModel zeros(std::size_t classes, std::size_t dim, double sigma);

  std::size_t num_classes() const { return weights_.size(); }
  std::size_t dim() const { return weights_.front().size(); }
  double sigma() const { return sigma_; }
  /// Weight vector of class c, 1-based.
  std::span<const double> w(int c) const;
  std::span<double> mutable_w(int c);
  const std::vector<Vector>& weights() const { return weights_; }

  friend bool operator==(const MulticlassModel&, const MulticlassModel&) = default;

 private:
  std::vector<Vector> weights_;
  double sigma_;
};

/// Sum over y' != y of robust_hinge(x, +1; w_y - w_y').
double multiclass_sum_loss(const MulticlassModel& model, std::span<const double> x, int y);

/// Gradient of multiclass_sum_loss with respect to w_r.
Vector multiclass_sum_gradient(const MulticlassModel& model, std::span<const double> x, int y,
                               int r);

/// Gradients with respect to every class vector at once (index c-1 holds w_c).
std::vector<Vector> multiclass_sum_gradients(const MulticlassModel& model,
                                             std::span<const double> x, int y);

}  // namespace guru
