#pragma once

#include <numbers>
#include <string_view>

// Scalar primitives of the Gaussian-robust framework.
//
// Naming note: `gauss_cdf` is the standard normal CDF, written "erf" in much
// of the robust-hinge literature. It is not the conventional error function.
namespace guru {

inline constexpr double kInvSqrt2Pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;

/// Standard normal density.
double gauss_pdf(double t);

/// Standard normal CDF. Result is clamped to the open interval (0, 1), so
/// gauss_cdf_inv is defined on every value this returns.
double gauss_cdf(double t);

/// Inverse of gauss_cdf. Throws DomainError unless 0 < p < 1.
double gauss_cdf_inv(double p);

// The smooth hinge surrogate f(z) = z*Phi(z) + phi(z) and its derivatives.
double f_value(double z);
double f_derivative(double z);
double f_second(double z);

/// Plug-in scalar losses. ErfLoss is f above, LogLoss is log2(1 + 2^z) and
/// QuadLoss is the piecewise quadratic that is 0 below -4, (z+4)^2/16 on
/// [-4, 4] and z above 4.
enum class ScalarLoss { ErfLoss, LogLoss, QuadLoss };

std::string_view to_string(ScalarLoss loss);

double loss_value(ScalarLoss loss, double z);
double loss_derivative(ScalarLoss loss, double z);

/// Right end of the conjugate's domain (all three losses have slope <= 1).
inline constexpr double conjugate_domain_upper(ScalarLoss) { return 1.0; }

/// Fenchel conjugate in the concave convention inf_z [loss(z) - alpha*z].
/// ErfLoss and LogLoss need 0 < alpha < 1, QuadLoss accepts [0, 1].
double conjugate_value(ScalarLoss loss, double alpha);

/// scale * loss(u / scale). Throws DomainError for scale <= 0.
double perspective(ScalarLoss loss, double scale, double u);

/// Partial derivatives of the perspective with respect to (scale, u).
struct PerspectiveGrad {
  double d_scale;
  double d_u;
};
PerspectiveGrad perspective_gradient(ScalarLoss loss, double scale, double u);

}  // namespace guru
