#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "guru/data_io.hpp"
#include "guru/robust_loss.hpp"

namespace guru {

inline constexpr double kAlphaClamp = 1e-15;
/// Samples with min(alpha, 1 - alpha) below this are excluded from norm restoration.
inline constexpr double kRestoreAlphaFloor = 1e-9;

struct NormRestoration {
  Vector estimates;
  std::vector<bool> valid;
  double reference_norm = 0.0;
  std::size_t valid_count = 0;
  /// max over valid m of |estimate_m - reference| / reference (0 if none valid).
  double max_rel_deviation = 0.0;
};

struct DualCertificate {
  Vector alphas;                 // cdf of the scaled margins, clamped into (0, 1)
  std::vector<bool> clamped;
  double dual_objective = 0.0;   // sum of alphas
  double primal_objective = 0.0;
  double gap_rel = 0.0;          // |dual - primal| / max(1, primal)
  double constraint_lhs = 0.0;   // || sum alpha_m y_m x_m ||
  double constraint_rhs = 0.0;   // sigma * sum conjugate(alpha_m)
  double grad_norm = 0.0;        // of the primal objective at the model
  double grad_tol = 0.0;
  double sigma = 0.0;
  NormRestoration restoration;

  double tightness() const;      // |lhs - rhs| / rhs
  bool stationary() const { return grad_norm <= grad_tol; }
  /// True when the certificate should not be trusted: non-stationary input or gap_rel > 1e-3.
  bool flagged() const;
};

/// Dual variables alpha_m = cdf((1 - y_m w.x_m) / (sigma ||w||)) and the
/// duality diagnostics derived from them. `grad_tol` is only recorded and
/// compared against the measured gradient norm.
DualCertificate build_certificate(const Dataset& data, const LinearModel& model,
                                  double grad_tol = 1e-6);

/// Per-sample norm estimates 1 / (sigma * cdf_inv(alpha_m) + y_m u.x_m) with
/// the alphas from `model` and u the unit dual direction sum alpha y x / ||.||.
NormRestoration restore_norm(const Dataset& data, const LinearModel& model);

/// Same formula with caller-supplied alphas and unit direction.
NormRestoration restore_norm_along(const Dataset& data, double sigma, std::span<const double> alphas,
                                   std::span<const double> direction, double reference_norm);

struct ConstraintShapeRow {
  double alpha;
  double exact;    // conjugate of the smooth hinge surrogate
  double entropy;  // binary entropy in bits
  double quad;     // 4 alpha (1 - alpha)
};

struct ConstraintShapeReport {
  std::vector<ConstraintShapeRow> rows;
  double max_exact_entropy = 0.0;
  double max_exact_quad = 0.0;
  double max_entropy_quad = 0.0;
};

/// Compares the exact per-sample constraint term with its two elementary
/// approximations. Every alpha must lie in (0, 1).
ConstraintShapeReport check_constraint_shapes(std::span<const double> alphas);

/// CSV block: summary in the comment header, then m, y, alpha, clamped,
/// norm_estimate, valid.
void write_certificate(const DualCertificate& cert, const Dataset& data, std::ostream& out);

}  // namespace guru
