#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "altbayes/kernels.hpp"
#include "altbayes/mcmc.hpp"

namespace altbayes {

enum class ConjugateKind { exponential_gamma, normal_known_variance };

/// One-parameter model whose evidence has a closed form.
/// exponential_gamma: x_i ~ Exp(rate lambda), lambda ~ Gamma(prior_shape, prior_rate).
/// normal_known_variance: x_i ~ N(mu, sigma^2), mu ~ N(prior_mean, prior_sd^2).
struct ConjugateCase {
  ConjugateKind kind = ConjugateKind::exponential_gamma;
  std::string name;
  std::vector<double> data;
  double prior_shape = 1.0;
  double prior_rate = 1.0;
  double prior_mean = 0.0;
  double prior_sd = 1.0;
  double sigma = 1.0;

  static ConjugateCase exponential_gamma(std::vector<double> data, double shape, double rate);
  static ConjugateCase normal(std::vector<double> data, double sigma, double prior_mean,
                              double prior_sd);
};

void validate(const ConjugateCase& c);

double conjugate_log_ml(const ConjugateCase& c);
// ln E_posterior[L(param)], the exact value the PPD estimate targets.
double conjugate_log_ppd(const ConjugateCase& c);
double conjugate_log_likelihood(const ConjugateCase& c, double param);
double conjugate_log_prior(const ConjugateCase& c, double param);

std::vector<double> sample_conjugate_prior(const ConjugateCase& c, std::size_t n,
                                           std::uint64_t seed);
std::vector<double> sample_conjugate_posterior(const ConjugateCase& c, std::size_t n,
                                               std::uint64_t seed);
// Normal case only: one draw per probability stratum ((t + U_t) / n), so the
// sample moments carry almost no Monte Carlo noise.
std::vector<double> sample_normal_posterior_stratified(const ConjugateCase& c, std::size_t n,
                                                       std::uint64_t seed);

// Target for run_chain. The sampler works on positive parameters, so a
// normal case must have essentially all posterior mass above 0.
SamplingTarget conjugate_target(const ConjugateCase& c);

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadratureAxis {
  double lower = 0.0;
  double upper = 1.0;
  std::size_t points = 2001;  // odd, >= 3
};

inline constexpr double kQuadratureTailTolerance = 1e-10;

// ln of the composite Simpson integral of exp(loglik + logprior) over a
// 1- or 2-dimensional box. The same grid spacing is then extended by one box
// width on every side; if that adds more than 1e-10 relative mass the
// integrand is not contained and QuadratureError asks for wider bounds.
double quadrature_log_ml(const DrawFunction& loglik, const DrawFunction& logprior,
                         const std::vector<QuadratureAxis>& axes);

struct ValidationRow {
  std::string case_name;
  std::string estimator;
  std::string method;  // direct, mcmc, quadrature, sampler
  std::size_t n = 0;
  double estimate = 0.0;
  double truth = 0.0;
  double error = 0.0;  // estimate - truth
  double tolerance = 0.0;
  bool pass = false;
};

/// Sample sizes and tolerances of one validation run.
struct ValidationPlan {
  std::size_t simple_mc_draws = 1000000;
  double simple_mc_tol = 0.02;
  std::size_t harmonic_draws = 200000;
  double harmonic_tol = 0.15;
  // The estimator has infinite variance on the exponential-gamma case; its
  // error on correlated MCMC draws is wider than on direct draws.
  double harmonic_mcmc_tol = 0.4;
  std::size_t ppd_draws = 200000;
  double ppd_tol = 0.02;
  std::size_t laplace_draws = 100000;
  double laplace_tol = 1e-3;
  double laplace_mcmc_tol = 0.02;
  std::size_t mcmc_burn_in = 5000;
  double quadrature_tol = 1e-6;
  std::size_t calibration_chains = 4;
  std::size_t calibration_draws = 20000;  // per chain
  double calibration_rhat_max = 1.05;
  double calibration_ks_max = 0.02;
  double calibration_se_multiple = 3.0;

  static ValidationPlan full();
  // N = 1e4 everywhere, tolerances widened by roughly sqrt(100) where they
  // scale with 1/sqrt(N).
  static ValidationPlan quick();
};

struct ValidationOptions {
  std::uint64_t seed = 0;
  ValidationPlan plan = ValidationPlan::full();
  // Passed to every MCMC run; -1 reproduces the wrong-sign Jacobian mutation.
  double jacobian_sign = 1.0;
};

// Estimator rows for one conjugate case: direct draws for every estimator
// the case supports, then the same estimators on MCMC draws.
std::vector<ValidationRow> validate_estimators(const ConjugateCase& c,
                                               const ValidationOptions& options);

// Gamma(2,1) target: mean, sd, split R-hat and KS distance.
std::vector<ValidationRow> validate_sampler(const ValidationOptions& options);

// Everything: exponential-gamma and normal estimator rows, quadrature rows,
// sampler calibration rows.
std::vector<ValidationRow> run_oracle_suite(const ValidationOptions& options);

// Header: case,estimator,method,n,estimate,truth,error,tolerance,pass
void write_validation_csv(std::ostream& os, const std::vector<ValidationRow>& rows);

// Largest |F_n(x) - F(x)| over the sample.
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);

}  // namespace altbayes
