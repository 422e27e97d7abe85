#include "altbayes/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace altbayes {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kAsymptoticCutoff = 8.0;
}  // namespace

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) {
    throw UsageError("log_sum_exp: empty input");
  }
  const double max_v = *std::max_element(values.begin(), values.end());
  if (std::isinf(max_v)) {
    return max_v;
  }
  double sum = 0.0;
  for (double v : values) {
    sum += std::exp(v - max_v);
  }
  return max_v + std::log(sum);
}

double log_mean_exp(std::span<const double> values) {
  return log_sum_exp(values) - std::log(static_cast<double>(values.size()));
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double log_std_normal_sf(double z) {
  if (std::isnan(z)) {
    return z;
  }
  if (z < kAsymptoticCutoff) {
    return std::log(0.5 * std::erfc(z / kSqrt2));
  }
  if (std::isinf(z)) {
    return -kInf;
  }
  // 1 - Phi(z) = phi(z)/z * (1 - 1/z^2 + 3/z^4 - 15/z^6 + ...), summed up to
  // the smallest term of the divergent series.
  const double inv_z2 = 1.0 / (z * z);
  double term = 1.0;
  double series = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double next = -term * (2.0 * k - 1.0) * inv_z2;
    if (std::abs(next) >= std::abs(term) || std::abs(next) < 1e-18) {
      break;
    }
    series += next;
    term = next;
  }
  return -0.5 * z * z - kLnSqrtTwoPi - std::log(z) + std::log(series);
}

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -kInf;
    if (p == 1.0) return kInf;
    throw UsageError("std_normal_quantile: p outside [0, 1]");
  }
  // Acklam's rational approximation followed by two Halley steps.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
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
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int i = 0; i < 2; ++i) {
    // Residual on the smaller tail keeps relative precision.
    const double e = (x < 0.0) ? 0.5 * std::erfc(-x / kSqrt2) - p
                               : (1.0 - p) - 0.5 * std::erfc(x / kSqrt2);
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double gamma_log_pdf(double x, double shape, double rate) {
  if (!(x > 0.0)) {
    return -kInf;
  }
  return shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x -
         std::lgamma(shape);
}

}  // namespace altbayes
