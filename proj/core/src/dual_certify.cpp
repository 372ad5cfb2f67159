#include "guru/dual_certify.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "guru/csv.hpp"
#include "guru/error.hpp"
#include "guru/format.hpp"
#include "guru/math_core.hpp"
#include "guru/trainer_linear.hpp"

namespace guru {

double DualCertificate::tightness() const {
  return std::abs(constraint_lhs - constraint_rhs) / constraint_rhs;
}

bool DualCertificate::flagged() const { return !stationary() || gap_rel > 1e-3; }

namespace {

Vector dual_sum(const Dataset& data, std::span<const double> alphas) {
  Vector s(data.dim(), 0.0);
  for (std::size_t m = 0; m < data.size(); ++m) axpy(alphas[m] * data.y(m), data.x(m), s);
  return s;
}

}  // namespace

NormRestoration restore_norm_along(const Dataset& data, double sigma,
                                   std::span<const double> alphas,
                                   std::span<const double> direction, double reference_norm) {
  require_same_dim(data.size(), alphas.size(), "restore_norm alphas");
  require_same_dim(data.dim(), direction.size(), "restore_norm direction");
  NormRestoration r;
  r.reference_norm = reference_norm;
  r.estimates.assign(data.size(), 0.0);
  r.valid.assign(data.size(), false);
  for (std::size_t m = 0; m < data.size(); ++m) {
    const double a = alphas[m];
    if (!(std::min(a, 1.0 - a) >= kRestoreAlphaFloor)) continue;
    const double denom = sigma * gauss_cdf_inv(a) + data.y(m) * dot(direction, data.x(m));
    if (!(denom > 0.0)) continue;
    r.estimates[m] = 1.0 / denom;
    r.valid[m] = true;
    ++r.valid_count;
    r.max_rel_deviation = std::max(r.max_rel_deviation,
                                   std::abs(r.estimates[m] - reference_norm) / reference_norm);
  }
  return r;
}

namespace {

struct Alphas {
  Vector values;
  std::vector<bool> clamped;
};

Alphas model_alphas(const Dataset& data, const LinearModel& model) {
  const double wn = model.norm();
  if (!(wn > 0.0)) throw std::invalid_argument("dual certificate needs ||w|| > 0");
  const double s = model.sigma() * wn;
  Alphas a{Vector(data.size()), std::vector<bool>(data.size(), false)};
  for (std::size_t m = 0; m < data.size(); ++m) {
    const double z = (1.0 - data.y(m) * model.decision(data.x(m))) / s;
    if (!std::isfinite(z)) throw DataError("non-finite margin at sample " + std::to_string(m));
    const double raw = gauss_cdf(z);
    a.values[m] = std::clamp(raw, kAlphaClamp, 1.0 - kAlphaClamp);
    a.clamped[m] = a.values[m] != raw;
  }
  return a;
}

NormRestoration restore_with(const Dataset& data, const LinearModel& model, const Alphas& a) {
  Vector dir = dual_sum(data, a.values);
  const double n = norm(dir);
  if (!(n > 0.0)) throw DataError("dual direction vanishes; norm restoration undefined");
  scale(1.0 / n, dir);
  NormRestoration r = restore_norm_along(data, model.sigma(), a.values, dir, model.norm());
  // Clamped alphas carry no margin information.
  for (std::size_t m = 0; m < data.size(); ++m) {
    if (a.clamped[m] && r.valid[m]) {
      r.valid[m] = false;
      --r.valid_count;
    }
  }
  r.max_rel_deviation = 0.0;
  for (std::size_t m = 0; m < data.size(); ++m) {
    if (r.valid[m]) {
      r.max_rel_deviation = std::max(r.max_rel_deviation,
                                     std::abs(r.estimates[m] - r.reference_norm) / r.reference_norm);
    }
  }
  return r;
}

}  // namespace

NormRestoration restore_norm(const Dataset& data, const LinearModel& model) {
  data.require_binary("restore_norm");
  require_same_dim(model.dim(), data.dim(), "restore_norm");
  return restore_with(data, model, model_alphas(data, model));
}

DualCertificate build_certificate(const Dataset& data, const LinearModel& model, double grad_tol) {
  data.require_binary("build_certificate");
  require_same_dim(model.dim(), data.dim(), "build_certificate");
  const Alphas a = model_alphas(data, model);

  DualCertificate c;
  c.alphas = a.values;
  c.clamped = a.clamped;
  c.sigma = model.sigma();
  c.grad_tol = grad_tol;
  for (double v : c.alphas) c.dual_objective += v;
  c.primal_objective = robust_objective(model, data);
  c.gap_rel = std::abs(c.dual_objective - c.primal_objective) / std::max(1.0, c.primal_objective);
  c.constraint_lhs = norm(dual_sum(data, c.alphas));
  double conj = 0.0;
  for (double v : c.alphas) conj += conjugate_value(ScalarLoss::ErfLoss, v);
  c.constraint_rhs = model.sigma() * conj;
  c.grad_norm = norm(robust_objective_gradient(model, data));
  c.restoration = restore_with(data, model, a);
  return c;
}

ConstraintShapeReport check_constraint_shapes(std::span<const double> alphas) {
  ConstraintShapeReport rep;
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) {
      throw DomainError("constraint shapes need alpha in (0, 1), got " + format_double(a));
    }
    const ConstraintShapeRow row{a, conjugate_value(ScalarLoss::ErfLoss, a),
                                 conjugate_value(ScalarLoss::LogLoss, a),
                                 conjugate_value(ScalarLoss::QuadLoss, a)};
    rep.max_exact_entropy = std::max(rep.max_exact_entropy, std::abs(row.exact - row.entropy));
    rep.max_exact_quad = std::max(rep.max_exact_quad, std::abs(row.exact - row.quad));
    rep.max_entropy_quad = std::max(rep.max_entropy_quad, std::abs(row.entropy - row.quad));
    rep.rows.push_back(row);
  }
  return rep;
}

void write_certificate(const DualCertificate& cert, const Dataset& data, std::ostream& out) {
  require_same_dim(data.size(), cert.alphas.size(), "write_certificate");
  const auto& r = cert.restoration;
  CsvWriter csv(out, {"m", "y", "alpha", "clamped", "norm_estimate", "valid"},
                {"gap_rel=" + format_double(cert.gap_rel) +
                     " lhs=" + format_double(cert.constraint_lhs) +
                     " rhs=" + format_double(cert.constraint_rhs) +
                     " tightness=" + format_double(cert.tightness()),
                 "primal=" + format_double(cert.primal_objective) +
                     " dual=" + format_double(cert.dual_objective) +
                     " grad_norm=" + format_double(cert.grad_norm) +
                     " grad_tol=" + format_double(cert.grad_tol) +
                     " sigma=" + format_double(cert.sigma),
                 "norm=" + format_double(r.reference_norm) +
                     " valid_estimates=" + std::to_string(r.valid_count) +
                     " max_rel_deviation=" + format_double(r.max_rel_deviation)});
  for (std::size_t m = 0; m < cert.alphas.size(); ++m) {
    csv.row({std::to_string(m), std::to_string(data.y(m)), format_double(cert.alphas[m]),
             cert.clamped[m] ? "1" : "0", r.valid[m] ? format_double(r.estimates[m]) : "",
             r.valid[m] ? "1" : "0"});
  }
}

}  // namespace guru
