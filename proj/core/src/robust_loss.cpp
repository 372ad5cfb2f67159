#include "guru/robust_loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "guru/error.hpp"
#include "guru/math_core.hpp"
#include "guru/rng.hpp"

namespace guru {
namespace {

void require_label(int y) {
  if (y != 1 && y != -1) {
    throw std::invalid_argument("binary label must be +1 or -1, got " + std::to_string(y));
  }
}

// A scale this small makes u / scale meaningless; the hinge limit applies.
bool degenerate_scale(double scale, double u) {
  return !(scale > std::numeric_limits<double>::min() * std::max(1.0, std::abs(u))) ||
         !std::isfinite(u / scale);
}

}  // namespace

LinearModel::LinearModel(Vector w, double sigma) : w_(std::move(w)), sigma_(sigma) {
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) {
    throw std::invalid_argument("sigma must be positive and finite");
  }
  if (!all_finite(w_)) throw std::invalid_argument("weight vector has non-finite entries");
}

double hinge(std::span<const double> w, std::span<const double> x, int y) {
  return std::max(0.0, 1.0 - y * dot(w, x));
}

double robust_hinge_from_margin(double noise_scale, double u) {
  if (degenerate_scale(noise_scale, u)) return u > 0.0 ? u : 0.0;
  return perspective(ScalarLoss::ErfLoss, noise_scale, u);
}

double robust_hinge(const LinearModel& model, std::span<const double> x, int y) {
  require_same_dim(model.dim(), x.size(), "robust_hinge");
  require_label(y);
  const double u = 1.0 - y * dot(model.w(), x);
  return robust_hinge_from_margin(model.sigma() * model.norm(), u);
}

void accumulate_robust_hinge_gradient(std::span<const double> w, double w_norm, double sigma,
                                      std::span<const double> x, int y, double weight,
                                      std::span<double> out) {
  const double u = 1.0 - y * dot(w, x);
  const double scale = sigma * w_norm;
  if (degenerate_scale(scale, u)) {
    // Limit as ||w|| -> 0: the cdf factor tends to [u > 0], the density term vanishes.
    const double cdf = u > 0.0 ? 1.0 : (u < 0.0 ? 0.0 : 0.5);
    axpy(-weight * y * cdf, x, out);
    return;
  }
  const PerspectiveGrad g = perspective_gradient(ScalarLoss::ErfLoss, scale, u);
  axpy(-weight * y * g.d_u, x, out);
  axpy(weight * g.d_scale * sigma / w_norm, w, out);
}

Vector robust_hinge_gradient(const LinearModel& model, std::span<const double> x, int y) {
  require_same_dim(model.dim(), x.size(), "robust_hinge_gradient");
  require_label(y);
  Vector g(model.dim(), 0.0);
  accumulate_robust_hinge_gradient(model.w(), model.norm(), model.sigma(), x, y, 1.0, g);
  return g;
}

// ---------------------------------------------------------------------------

CovarianceChoice CovarianceChoice::rank_one(CovarianceConstraint constraint, double budget,
                                            std::span<const double> direction) {
  const double n = norm(direction);
  if (!(n > 0.0)) throw std::invalid_argument("rank-one covariance needs a nonzero direction");
  CovarianceChoice c;
  c.constraint_ = constraint;
  c.form_ = Form::RankOne;
  c.budget_ = budget;
  c.dim_ = direction.size();
  c.direction_.assign(direction.begin(), direction.end());
  scale(1.0 / n, c.direction_);
  return c;
}

CovarianceChoice CovarianceChoice::scaled_identity(double budget, std::size_t dim) {
  CovarianceChoice c;
  c.constraint_ = CovarianceConstraint::SpectralBound;
  c.form_ = Form::ScaledIdentity;
  c.budget_ = budget;
  c.dim_ = dim;
  return c;
}

CovarianceChoice CovarianceChoice::single_axis(double budget, std::size_t dim, std::size_t axis) {
  if (axis >= dim) throw std::out_of_range("covariance axis out of range");
  CovarianceChoice c;
  c.constraint_ = CovarianceConstraint::DiagonalTraceBound;
  c.form_ = Form::SingleAxis;
  c.budget_ = budget;
  c.dim_ = dim;
  c.axis_ = axis;
  return c;
}

double CovarianceChoice::entry(std::size_t i, std::size_t j) const {
  switch (form_) {
    case Form::RankOne:
      return budget_ * direction_[i] * direction_[j];
    case Form::ScaledIdentity:
      return i == j ? budget_ : 0.0;
    case Form::SingleAxis:
      return (i == axis_ && j == axis_) ? budget_ : 0.0;
  }
  return 0.0;
}

std::vector<double> CovarianceChoice::dense() const {
  std::vector<double> m(dim_ * dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j < dim_; ++j) m[i * dim_ + j] = entry(i, j);
  }
  return m;
}

double CovarianceChoice::trace() const {
  switch (form_) {
    case Form::RankOne:
      return budget_ * squared_norm(direction_);
    case Form::ScaledIdentity:
      return budget_ * static_cast<double>(dim_);
    case Form::SingleAxis:
      return budget_;
  }
  return 0.0;
}

double CovarianceChoice::quadratic_form(std::span<const double> v) const {
  require_same_dim(dim_, v.size(), "quadratic_form");
  switch (form_) {
    case Form::RankOne: {
      const double p = dot(direction_, v);
      return budget_ * p * p;
    }
    case Form::ScaledIdentity:
      return budget_ * squared_norm(v);
    case Form::SingleAxis:
      return budget_ * v[axis_] * v[axis_];
  }
  return 0.0;
}

CovarianceChoice adversarial_covariance(CovarianceConstraint constraint, double budget,
                                        std::span<const double> w) {
  if (!(budget > 0.0)) throw std::invalid_argument("covariance budget must be positive");
  switch (constraint) {
    case CovarianceConstraint::TraceBound:
      if (!(norm(w) > 0.0)) {
        throw std::invalid_argument("trace-bound adversary is undefined at w = 0");
      }
      return CovarianceChoice::rank_one(constraint, budget, w);
    case CovarianceConstraint::SpectralBound:
      return CovarianceChoice::scaled_identity(budget, w.size());
    case CovarianceConstraint::DiagonalTraceBound: {
      if (!(norm(w) > 0.0)) {
        throw std::invalid_argument("diagonal adversary is undefined at w = 0");
      }
      std::size_t best = 0;
      for (std::size_t i = 1; i < w.size(); ++i) {
        if (w[i] * w[i] > w[best] * w[best]) best = i;
      }
      return CovarianceChoice::single_axis(budget, w.size(), best);
    }
  }
  throw std::invalid_argument("unknown covariance constraint");
}

namespace {

// Quadratic form of a random feasible challenger for each constraint family.
double challenger_value(CovarianceConstraint constraint, double budget,
                        std::span<const double> w, Rng& rng) {
  const std::size_t d = w.size();
  switch (constraint) {
    case CovarianceConstraint::TraceBound: {
      // Sigma = c * B B^T with B of random rank, rescaled to trace = t * budget.
      const std::size_t rank = 1 + rng.uniform_index(d);
      double trace = 0.0;
      double form = 0.0;
      for (std::size_t k = 0; k < rank; ++k) {
        double bw = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          const double b = rng.normal();
          trace += b * b;
          bw += b * w[i];
        }
        form += bw * bw;
      }
      const double t = rng.uniform01() < 0.5 ? 1.0 : rng.uniform01();
      return form * t * budget / trace;
    }
    case CovarianceConstraint::SpectralBound: {
      // Q diag(lambda) Q^T with Q from Gram-Schmidt and lambda in [0, budget].
      std::vector<Vector> q;
      double form = 0.0;
      while (q.size() < d) {
        const std::size_t k = q.size();
        Vector v(d);
        for (double& e : v) e = rng.normal();
        // Two passes keep Q orthonormal to rounding level.
        for (int pass = 0; pass < 2; ++pass) {
          for (const Vector& prev : q) axpy(-dot(prev, v), prev, v);
        }
        const double n = norm(v);
        if (!(n > 1e-3)) continue;
        scale(1.0 / n, v);
        const double lambda = (k == 0 || rng.uniform01() < 0.5) ? budget : budget * rng.uniform01();
        const double p = dot(v, w);
        form += lambda * p * p;
        q.push_back(std::move(v));
      }
      return form;
    }
    case CovarianceConstraint::DiagonalTraceBound: {
      Vector a(d);
      double total = 0.0;
      for (double& e : a) {
        e = rng.uniform01() < 0.3 ? 0.0 : -std::log(1.0 - rng.uniform01());
        total += e;
      }
      if (!(total > 0.0)) {
        a[rng.uniform_index(d)] = 1.0;
        total = 1.0;
      }
      double form = 0.0;
      for (std::size_t i = 0; i < d; ++i) form += budget * a[i] / total * w[i] * w[i];
      return form;
    }
  }
  return 0.0;
}

}  // namespace

bool adversarial_covariance_is_optimal(const CovarianceChoice& choice, std::span<const double> w,
                                       std::size_t trials, std::uint64_t seed) {
  require_same_dim(choice.dim(), w.size(), "adversarial_covariance_is_optimal");
  const double mine = choice.quadratic_form(w);
  Rng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    if (mine < challenger_value(choice.constraint(), choice.budget(), w, rng) - 1e-10) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

Vector asvc_displacement(std::span<const double> w, double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be non-negative");
  const double n = norm(w);
  if (!(n > 0.0)) throw std::invalid_argument("displacement direction is undefined at w = 0");
  Vector dx(w.begin(), w.end());
  scale(-delta / n, dx);
  return dx;
}

double asvc_robust_hinge(std::span<const double> w, double delta, std::span<const double> x,
                         int y) {
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be non-negative");
  require_label(y);
  const double n = norm(w);
  if (!(n > 0.0)) throw std::invalid_argument("asvc loss is undefined at w = 0");
  return std::max(0.0, 1.0 - y * dot(w, x) + delta * n);
}

// ---------------------------------------------------------------------------

MulticlassModel::MulticlassModel(std::vector<Vector> weights, double sigma)
    : weights_(std::move(weights)), sigma_(sigma) {
  if (weights_.size() < 2) throw std::invalid_argument("multiclass model needs at least 2 classes");
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) {
    throw std::invalid_argument("sigma must be positive and finite");
  }
  for (const Vector& w : weights_) {
    require_same_dim(weights_.front().size(), w.size(), "MulticlassModel");
    if (!all_finite(w)) throw std::invalid_argument("weight vector has non-finite entries");
  }
}

MulticlassModel MulticlassModel::zeros(std::size_t classes, std::size_t dim, double sigma) {
  return {std::vector<Vector>(classes, Vector(dim, 0.0)), sigma};
}

std::span<const double> MulticlassModel::w(int c) const {
  if (c < 1 || static_cast<std::size_t>(c) > weights_.size()) {
    throw std::out_of_range("class index out of range: " + std::to_string(c));
  }
  return weights_[static_cast<std::size_t>(c - 1)];
}

std::span<double> MulticlassModel::mutable_w(int c) {
  if (c < 1 || static_cast<std::size_t>(c) > weights_.size()) {
    throw std::out_of_range("class index out of range: " + std::to_string(c));
  }
  return weights_[static_cast<std::size_t>(c - 1)];
}

double multiclass_sum_loss(const MulticlassModel& model, std::span<const double> x, int y) {
  const auto wy = model.w(y);
  require_same_dim(model.dim(), x.size(), "multiclass_sum_loss");
  double total = 0.0;
  for (int c = 1; c <= static_cast<int>(model.num_classes()); ++c) {
    if (c == y) continue;
    total += robust_hinge(LinearModel(subtract(wy, model.w(c)), model.sigma()), x, +1);
  }
  return total;
}

std::vector<Vector> multiclass_sum_gradients(const MulticlassModel& model,
                                             std::span<const double> x, int y) {
  const auto wy = model.w(y);
  require_same_dim(model.dim(), x.size(), "multiclass_sum_gradients");
  const std::size_t classes = model.num_classes();
  std::vector<Vector> grads(classes, Vector(model.dim(), 0.0));
  Vector pair_grad(model.dim());
  for (int c = 1; c <= static_cast<int>(classes); ++c) {
    if (c == y) continue;
    const Vector dw = subtract(wy, model.w(c));
    std::fill(pair_grad.begin(), pair_grad.end(), 0.0);
    accumulate_robust_hinge_gradient(dw, norm(dw), model.sigma(), x, +1, 1.0, pair_grad);
    axpy(1.0, pair_grad, grads[static_cast<std::size_t>(y - 1)]);
    axpy(-1.0, pair_grad, grads[static_cast<std::size_t>(c - 1)]);
  }
  return grads;
}

Vector multiclass_sum_gradient(const MulticlassModel& model, std::span<const double> x, int y,
                               int r) {
  model.w(r);  // range check
  return multiclass_sum_gradients(model, x, y)[static_cast<std::size_t>(r - 1)];
}

}  // namespace guru
