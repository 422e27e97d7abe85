#pragma once

#include <span>
#include <stdexcept>
#include <string>

namespace altbayes {

/// Thrown when an operation is called outside its documented domain
/// (empty inputs, malformed data, inconsistent arguments).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a computation leaves the representable range of double.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kLnTwoPi = 1.8378770664093454836;
inline constexpr double kLnSqrtTwoPi = 0.91893853320467274178;

// ln sum_t exp(v_t). Entries may be -inf; an all -inf input yields -inf.
// Throws UsageError on an empty input.
double log_sum_exp(std::span<const double> values);

// ln( (1/N) sum_t exp(v_t) )
double log_mean_exp(std::span<const double> values);

double std_normal_cdf(double z);

// ln(1 - Phi(z)). Uses erfc below z = 8 and the asymptotic Mills-ratio
// series above it; absolute error below 1e-10 for |z| <= 30.
double log_std_normal_sf(double z);

// Inverse of std_normal_cdf on (0, 1).
double std_normal_quantile(double p);

// Normalized gamma log-density with shape/rate parameterization.
// Returns -inf for x <= 0.
double gamma_log_pdf(double x, double shape, double rate);

}  // namespace altbayes
