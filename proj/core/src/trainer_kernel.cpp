#include "guru/trainer_kernel.hpp"

#include <cmath>
#include <stdexcept>

#include "guru/error.hpp"
#include "guru/format.hpp"
#include "guru/parallel.hpp"
#include "guru/rng.hpp"

namespace guru {

void KernelSpec::validate() const {
  switch (kind) {
    case Kind::Linear:
      return;
    case Kind::Polynomial:
      if (degree < 1) throw std::invalid_argument("polynomial degree must be >= 1");
      if (!(offset >= 0.0) || !std::isfinite(offset)) {
        throw std::invalid_argument("polynomial offset must be >= 0");
      }
      return;
    case Kind::RBF:
      if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw std::invalid_argument("rbf gamma must be positive");
      }
      return;
  }
}

double KernelSpec::operator()(std::span<const double> a, std::span<const double> b) const {
  switch (kind) {
    case Kind::Linear:
      return dot(a, b);
    case Kind::Polynomial:
      return std::pow(offset + dot(a, b), degree);
    case Kind::RBF: {
      require_same_dim(a.size(), b.size(), "rbf kernel");
      double d2 = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
      return std::exp(-gamma * d2);
    }
  }
  return 0.0;
}

std::string KernelSpec::to_string() const {
  switch (kind) {
    case Kind::Linear:
      return "linear";
    case Kind::Polynomial:
      return "poly:" + std::to_string(degree) + ":" + format_double(offset);
    case Kind::RBF:
      return "rbf:" + format_double(gamma);
  }
  return "unknown";
}

KernelSpec KernelSpec::parse(std::string_view text) {
  auto fail = [&]() -> KernelSpec {
    throw std::invalid_argument("bad kernel spec '" + std::string(text) +
                                "' (expected linear, poly:<degree>[:<offset>] or rbf:<gamma>)");
  };
  KernelSpec k;
  if (text == "linear") return k;
  if (text.starts_with("poly:")) {
    auto rest = text.substr(5);
    const auto colon = rest.find(':');
    const auto deg = parse_integer<int>(rest.substr(0, colon));
    if (!deg) return fail();
    double off = 1.0;
    if (colon != std::string_view::npos) {
      const auto o = parse_double(rest.substr(colon + 1));
      if (!o) return fail();
      off = *o;
    }
    k = polynomial(*deg, off);
  } else if (text.starts_with("rbf:")) {
    const auto g = parse_double(text.substr(4));
    if (!g) return fail();
    k = rbf(*g);
  } else {
    return fail();
  }
  k.validate();
  return k;
}

// ---------------------------------------------------------------------------

GramMatrix::GramMatrix(std::shared_ptr<const Dataset> data, KernelSpec kernel,
                       std::size_t full_limit, std::size_t cache_rows)
    : data_(std::move(data)), kernel_(kernel), cache_rows_(std::max<std::size_t>(1, cache_rows)) {
  kernel_.validate();
  const std::size_t m = data_->size();
  diag_.resize(m);
  for (std::size_t i = 0; i < m; ++i) diag_[i] = kernel_(data_->x(i), data_->x(i));
  if (m > 0 && m <= full_limit) {
    full_.assign(m * m, 0.0);
    // Upper triangle in parallel, then mirror so the matrix is exactly symmetric.
    parallel_for(m, default_workers(), [&](std::size_t i) {
      for (std::size_t j = i; j < m; ++j) full_[i * m + j] = kernel_(data_->x(i), data_->x(j));
    });
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < i; ++j) full_[i * m + j] = full_[j * m + i];
    }
  }
}

std::vector<double> GramMatrix::compute_row(std::size_t i) const {
  const std::size_t m = data_->size();
  std::vector<double> r(m);
  // Evaluate with the smaller index first, matching the full matrix's upper triangle.
  for (std::size_t j = 0; j < m; ++j) {
    r[j] = j < i ? kernel_(data_->x(j), data_->x(i)) : kernel_(data_->x(i), data_->x(j));
  }
  return r;
}

std::span<const double> GramMatrix::row(std::size_t i) {
  const std::size_t m = size();
  if (i >= m) throw std::out_of_range("gram row out of range");
  if (!full_.empty()) return std::span<const double>(full_).subspan(i * m, m);
  if (auto it = index_.find(i); it != index_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second);
    return lru_.front().second;
  }
  if (lru_.size() >= cache_rows_) {
    index_.erase(lru_.back().first);
    lru_.pop_back();
  }
  lru_.emplace_front(i, compute_row(i));
  index_[i] = lru_.begin();
  return lru_.front().second;
}

double GramMatrix::operator()(std::size_t i, std::size_t j) {
  if (!full_.empty()) return full_[i * size() + j];
  return row(i)[j];
}

std::vector<double> gram_matrix(const Dataset& data, const KernelSpec& kernel) {
  if (data.empty()) throw DataError("gram_matrix: dataset has no samples");
  const std::size_t m = data.size();
  GramMatrix g(std::make_shared<const Dataset>(data), kernel, m);
  std::vector<double> out(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto r = g.row(i);
    std::copy(r.begin(), r.end(), out.begin() + static_cast<std::ptrdiff_t>(i * m));
  }
  return out;
}

// ---------------------------------------------------------------------------

KernelModel::KernelModel(std::shared_ptr<const Dataset> train, KernelSpec kernel, double sigma)
    : train_(std::move(train)), kernel_(kernel), sigma_(sigma) {
  if (!train_) throw std::invalid_argument("kernel model needs training samples");
  kernel_.validate();
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) throw std::invalid_argument("sigma must be positive");
  raw_.assign(train_->size(), 0.0);
}

KernelModel::KernelModel(std::shared_ptr<const Dataset> train, KernelSpec kernel, double sigma,
                         Vector alphas)
    : KernelModel(std::move(train), kernel, sigma) {
  require_same_dim(raw_.size(), alphas.size(), "KernelModel alphas");
  raw_ = std::move(alphas);
  const Vector d = train_decisions();
  double n2 = 0.0;
  for (std::size_t m = 0; m < raw_.size(); ++m) n2 += raw_[m] * train_->y(m) * d[m];
  nu_ = std::sqrt(std::max(0.0, n2));
}

KernelModel KernelModel::restore(std::shared_ptr<const Dataset> train, KernelSpec kernel,
                                 double sigma, Vector alphas, double nu) {
  KernelModel model(std::move(train), kernel, sigma);
  require_same_dim(model.raw_.size(), alphas.size(), "KernelModel alphas");
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw DataError("kernel model nu must be >= 0");
  model.raw_ = std::move(alphas);
  model.nu_ = nu;
  return model;
}

Vector KernelModel::alphas() const {
  Vector a(raw_);
  scale(scale_, a);
  return a;
}

double KernelModel::decision(std::span<const double> x) const {
  require_same_dim(train_->dim(), x.size(), "kernel decision");
  double acc = 0.0;
  for (std::size_t m = 0; m < raw_.size(); ++m) {
    if (raw_[m] != 0.0) acc += raw_[m] * train_->y(m) * kernel_(train_->x(m), x);
  }
  return scale_ * acc;
}

void KernelModel::fold_scale() {
  raw_ = alphas();
  scale_ = 1.0;
}

GramMatrix& KernelModel::gram() {
  if (!gram_) gram_ = std::make_shared<GramMatrix>(train_, kernel_);
  return *gram_;
}

Vector KernelModel::train_decisions() {
  GramMatrix& g = gram();
  const std::size_t m_total = raw_.size();
  Vector out(m_total);
  for (std::size_t i = 0; i < m_total; ++i) {
    const auto row = g.row(i);
    double acc = 0.0;
    for (std::size_t m = 0; m < m_total; ++m) acc += raw_[m] * train_->y(m) * row[m];
    out[i] = scale_ * acc;
  }
  return out;
}

void ken_guru_step(KernelModel& model, std::size_t i, std::size_t t, double eta0) {
  const std::size_t m_total = model.raw_.size();
  if (i >= m_total) throw std::out_of_range("ken_guru_step: sample index out of range");
  if (t < 1) throw std::invalid_argument("ken_guru_step: iteration counts from 1");
  GramMatrix& g = model.gram();
  const Dataset& data = *model.train_;
  const auto row = g.row(i);
  double acc = 0.0;
  for (std::size_t m = 0; m < m_total; ++m) acc += model.raw_[m] * data.y(m) * row[m];
  const double zeta = model.scale_ * acc;
  const int y = data.y(i);

  const StepCoefficients c =
      guru_step_coefficients(1.0 - y * zeta, model.nu_, model.sigma_, learning_rate(eta0, t));
  const double nu2 = c.gamma * c.gamma * model.nu_ * model.nu_ + 2.0 * c.gamma * c.mu * y * zeta +
                     c.mu * c.mu * g.diag(i);
  model.nu_ = std::sqrt(std::max(0.0, nu2));

  if (c.gamma == 0.0) {
    std::fill(model.raw_.begin(), model.raw_.end(), 0.0);
    model.scale_ = 1.0;
  } else {
    model.scale_ *= c.gamma;
  }
  model.raw_[i] += c.mu / model.scale_;

  const double mag = std::abs(model.scale_);
  if (mag < 1e-150 || mag > 1e150) {
    for (double& a : model.raw_) a *= model.scale_;
    model.scale_ = 1.0;
  }
}

double kernel_predict(const KernelModel& model, std::span<const double> x) {
  return model.decision(x);
}

Vector kernel_predict_batch(const KernelModel& model, const std::vector<Vector>& points) {
  Vector out(points.size());
  parallel_for(points.size(), default_workers(),
               [&](std::size_t i) { out[i] = model.decision(points[i]); });
  return out;
}

double kernel_objective(KernelModel& model) {
  const Vector d = model.train_decisions();
  const double noise_scale = model.sigma() * model.nu();
  double total = 0.0;
  for (std::size_t m = 0; m < d.size(); ++m) {
    total += robust_hinge_from_margin(noise_scale, 1.0 - model.train().y(m) * d[m]);
  }
  return total;
}

KernelTrainReport train_ken_guru(const Dataset& data, const KernelSpec& kernel, double sigma,
                                 const TrainConfig& cfg) {
  data.require_binary("train_ken_guru");
  cfg.validate();
  KernelTrainReport report{KernelModel(std::make_shared<const Dataset>(data), kernel, sigma), {},
                           0, false};
  KernelModel& model = report.model;
  Rng rng(cfg.seed);
  double previous = kernel_objective(model);
  report.objective_trace.push_back({0, previous});
  std::size_t t = 0;
  while (t < cfg.max_iters) {
    ++t;
    ken_guru_step(model, static_cast<std::size_t>(rng.uniform_index(data.size())), t, cfg.eta0);
    if (t % cfg.eval_period == 0 || t == cfg.max_iters) {
      const double current = kernel_objective(model);
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
  model.fold_scale();
  return report;
}

}  // namespace guru
