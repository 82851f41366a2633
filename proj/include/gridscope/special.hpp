#pragma once

// Special functions backing the distribution code: standard normal
// pdf/cdf/quantile and the regularized lower incomplete gamma with its
// inverse. Self-contained on purpose; accuracy targets are ~1e-12, well
// beyond what the fitting pipeline needs.

#include <cmath>
#include <limits>

#include "gridscope/errors.hpp"

namespace gridscope {

inline constexpr double kSqrt2 = 1.4142135623730951;
inline constexpr double kSqrt2Pi = 2.5066282746310002;
inline constexpr double kLogSqrt2Pi = 0.9189385332046727;

inline double norm_pdf(double z) { return std::exp(-0.5 * z * z) / kSqrt2Pi; }

inline double norm_log_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

// Acklam's rational approximation, then one Halley step. Relative error
// after refinement is near machine precision over (0,1).
inline double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw InvalidParams("norm_quantile needs p in [0,1]");
  }
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement.
  const double e = norm_cdf(x) - p;
  const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

// Regularized lower incomplete gamma P(a, x). Series for x < a+1,
// Lentz continued fraction for the complement otherwise.
inline double gamma_p(double a, double x) {
  if (a <= 0.0) throw InvalidParams("gamma_p needs a > 0");
  if (x < 0.0) throw InvalidParams("gamma_p needs x >= 0");
  if (x == 0.0) return 0.0;
  const double log_prefix = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 500; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return std::exp(log_prefix) * sum;
  }
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 - std::exp(log_prefix) * h;
}

// Inverse of gamma_p in x: returns x with P(a, x) = p. Wilson-Hilferty
// start, then guarded Newton against the gamma density.
inline double gamma_p_inv(double a, double p) {
  if (a <= 0.0) throw InvalidParams("gamma_p_inv needs a > 0");
  if (!(p >= 0.0 && p < 1.0)) {
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw InvalidParams("gamma_p_inv needs p in [0,1)");
  }
  if (p == 0.0) return 0.0;

  double x;
  if (a > 1.0) {
    const double z = norm_quantile(p);
    const double t = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * std::sqrt(a));
    x = a * t * t * t;
    if (x <= 0.0) x = 1e-3 * a;
  } else {
    const double t = 1.0 - a * (0.253 + a * 0.12);
    x = p < t ? std::pow(p / t, 1.0 / a) : 1.0 - std::log1p(-(p - t) / (1.0 - t));
  }

  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  const double lg = std::lgamma(a);
  for (int it = 0; it < 64; ++it) {
    const double f = gamma_p(a, x) - p;
    if (f > 0.0) hi = std::min(hi, x);
    else lo = std::max(lo, x);
    const double log_density = -x + (a - 1.0) * std::log(x) - lg;
    double step = f / std::exp(log_density);
    double next = x - step;
    if (!(next > lo && (next < hi))) {
      next = std::isinf(hi) ? x * 2.0 : 0.5 * (lo + hi);
    }
    // Relative step tolerance: roots can sit at 1e-20 for a < 1, so an
    // absolute floor here would stop after one step.
    if (std::fabs(next - x) <= 1e-14 * std::fabs(x)) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

}  // namespace gridscope
