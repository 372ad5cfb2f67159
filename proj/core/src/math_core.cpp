#include "guru/math_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "guru/error.hpp"

namespace guru {
namespace {

constexpr double kLn2 = std::numbers::ln2;

// Wichura's AS241 (PPND16) rational approximation, accurate to about 1e-16
// before refinement.
double ppnd16(double p) {
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        ((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
             6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
           1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
         1.3314166789178437745e+2) * r + 3.3871328727963666080e+0;
    const double den =
        ((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
             3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
           5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
         4.2313330701600911252e+1) * r + 1.0;
    return q * num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x = 0.0;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        ((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
             2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
           3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
         4.63033784615654529590e+0) * r + 1.42343711074968357734e+0;
    const double den =
        ((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
             1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
           6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
         2.05319162663775882187e+0) * r + 1.0;
    x = num / den;
  } else {
    r -= 5.0;
    const double num =
        ((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
             1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
           2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
         5.46378491116411436990e+0) * r + 6.65790464350110377720e+0;
    const double den =
        ((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
             1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
           1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
         5.99832206555887937690e-1) * r + 1.0;
    x = num / den;
  }
  return q < 0.0 ? -x : x;
}

// Lower-half inverse (p <= 0.5) with one Newton step against gauss_cdf.
double lower_inverse(double p) {
  double x = ppnd16(p);
  const double density = gauss_pdf(x);
  if (density > 0.0 && std::isfinite(x)) {
    const double step = (gauss_cdf(x) - p) / density;
    if (std::isfinite(step)) x -= step;
  }
  return x;
}

double log_loss(double z) {
  if (z > 0.0) return z + std::log1p(std::exp2(-z)) / kLn2;
  return std::log1p(std::exp2(z)) / kLn2;
}

double log_loss_derivative(double z) {
  if (z > 0.0) return 1.0 / (1.0 + std::exp2(-z));
  const double e = std::exp2(z);
  return e / (1.0 + e);
}

double quad_loss(double z) {
  if (z < -4.0) return 0.0;
  if (z > 4.0) return z;
  return (z + 4.0) * (z + 4.0) / 16.0;
}

double quad_loss_derivative(double z) {
  if (z < -4.0) return 0.0;
  if (z > 4.0) return 1.0;
  return (z + 4.0) / 8.0;
}

// Binary entropy in bits, with 0 log 0 = 0.
double binary_entropy(double a) {
  double h = 0.0;
  if (a > 0.0) h -= a * std::log2(a);
  if (a < 1.0) h -= (1.0 - a) * std::log2(1.0 - a);
  return h;
}

}  // namespace

double gauss_pdf(double t) { return kInvSqrt2Pi * std::exp(-0.5 * t * t); }

double gauss_cdf(double t) {
  constexpr double lo = std::numeric_limits<double>::denorm_min();
  const double hi = std::nextafter(1.0, 0.0);
  const double v = 0.5 * std::erfc(-t * std::numbers::sqrt2 * 0.5);
  return std::clamp(v, lo, hi);
}

double gauss_cdf_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("gauss_cdf_inv: p must lie in (0, 1), got " + std::to_string(p));
  }
  if (p > 0.5) return -lower_inverse(1.0 - p);  // 1 - p is exact here
  return lower_inverse(p);
}

double f_value(double z) {
  if (z > 0.0) return z + f_value(-z);  // f(z) - z = f(-z)
  const double v = z * gauss_cdf(z) + gauss_pdf(z);
  return v > 0.0 ? v : 0.0;
}

double f_derivative(double z) { return gauss_cdf(z); }

double f_second(double z) { return gauss_pdf(z); }

std::string_view to_string(ScalarLoss loss) {
  switch (loss) {
    case ScalarLoss::ErfLoss:
      return "erf";
    case ScalarLoss::LogLoss:
      return "log";
    case ScalarLoss::QuadLoss:
      return "quad";
  }
  return "?";
}

double loss_value(ScalarLoss loss, double z) {
  switch (loss) {
    case ScalarLoss::ErfLoss:
      return f_value(z);
    case ScalarLoss::LogLoss:
      return log_loss(z);
    case ScalarLoss::QuadLoss:
      return quad_loss(z);
  }
  return 0.0;
}

double loss_derivative(ScalarLoss loss, double z) {
  switch (loss) {
    case ScalarLoss::ErfLoss:
      return f_derivative(z);
    case ScalarLoss::LogLoss:
      return log_loss_derivative(z);
    case ScalarLoss::QuadLoss:
      return quad_loss_derivative(z);
  }
  return 0.0;
}

double conjugate_value(ScalarLoss loss, double alpha) {
  switch (loss) {
    case ScalarLoss::ErfLoss:
      if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("erf-loss conjugate: alpha must lie in (0, 1)");
      }
      return gauss_pdf(gauss_cdf_inv(alpha));
    case ScalarLoss::LogLoss:
      if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("log-loss conjugate: alpha must lie in (0, 1)");
      }
      return binary_entropy(alpha);
    case ScalarLoss::QuadLoss:
      // Outside [0, 1] the infimum is -infinity.
      if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw DomainError("quad-loss conjugate: alpha must lie in [0, 1]");
      }
      return 4.0 * alpha * (1.0 - alpha);
  }
  return 0.0;
}

double perspective(ScalarLoss loss, double scale, double u) {
  if (!(scale > 0.0)) {
    throw DomainError("perspective: scale must be positive");
  }
  const double z = u / scale;
  // scale -> 0 limit of every loss here is the hinge [u]_+.
  const double hinge = u > 0.0 ? u : 0.0;
  if (!std::isfinite(z)) return hinge;
  // Every supported loss dominates [z]_+; the max only absorbs rounding.
  return std::max(scale * loss_value(loss, z), hinge);
}

PerspectiveGrad perspective_gradient(ScalarLoss loss, double scale, double u) {
  if (!(scale > 0.0)) {
    throw DomainError("perspective_gradient: scale must be positive");
  }
  const double z = u / scale;
  if (!std::isfinite(z)) return {0.0, u > 0.0 ? 1.0 : 0.0};
  if (loss == ScalarLoss::ErfLoss) {
    // f(z) - z f'(z) collapses to the density.
    return {gauss_pdf(z), gauss_cdf(z)};
  }
  const double d = loss_derivative(loss, z);
  return {loss_value(loss, z) - z * d, d};
}

}  // namespace guru
