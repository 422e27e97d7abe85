#include "altbayes/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "altbayes/diagnostics.hpp"
#include "altbayes/numerics.hpp"
#include "altbayes/selection.hpp"
#include "csv_util.hpp"

namespace altbayes {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Independent RNG streams within one validation run.
enum Stream : std::size_t {
  kPriorStream = 11,
  kPosteriorStream,
  kStratifiedStream,
  kMcmcStream,
  kCalibrationStream,
};

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

// Normal evidence with the prior replaced by N(m0, s0^2).
double normal_log_evidence(const std::vector<double>& x, double sigma, double m0, double s0) {
  const double n = static_cast<double>(x.size());
  if (x.empty()) return 0.0;
  const double mean = sum(x) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double s2 = sigma * sigma;
  return -0.5 * n * kLnTwoPi - n * std::log(sigma) - 0.5 * std::log1p(n * s0 * s0 / s2) -
         0.5 * (ss / s2 + n * (mean - m0) * (mean - m0) / (s2 + n * s0 * s0));
}

struct NormalPosterior {
  double mean;
  double sd;
};

NormalPosterior normal_posterior(const ConjugateCase& c) {
  const double n = static_cast<double>(c.data.size());
  const double precision = 1.0 / (c.prior_sd * c.prior_sd) + n / (c.sigma * c.sigma);
  const double mean =
      (c.prior_mean / (c.prior_sd * c.prior_sd) + sum(c.data) / (c.sigma * c.sigma)) / precision;
  return {mean, 1.0 / std::sqrt(precision)};
}

ValidationRow make_row(const ConjugateCase& c, std::string estimator, std::string method,
                       std::size_t n, double estimate, double truth, double tol) {
  ValidationRow r;
  r.case_name = c.name;
  r.estimator = std::move(estimator);
  r.method = std::move(method);
  r.n = n;
  r.estimate = estimate;
  r.truth = truth;
  r.error = estimate - truth;
  r.tolerance = tol;
  r.pass = std::isfinite(r.error) && std::fabs(r.error) < tol;
  return r;
}

ValidationRow estimator_row(const ConjugateCase& c, const LogMarginal& lm, std::string method,
                            double truth, double tol) {
  const double v = lm.failed ? std::numeric_limits<double>::quiet_NaN() : lm.log_value;
  return make_row(c, std::string(to_string(lm.estimator)), std::move(method), lm.n_samples, v,
                  truth, tol);
}

std::vector<double> log_liks_of(const ConjugateCase& c, const std::vector<double>& params) {
  const DrawFunction f = [&](std::span<const double> x) {
    return conjugate_log_likelihood(c, x[0]);
  };
  return evaluate_rows(f, params, 1, ExecPolicy::parallel);
}

double laplace_from_values(const ConjugateCase& c, std::span<const double> values,
                           LogMarginal* out) {
  const PosteriorSummary s = summarize(values, 1);
  *out = log_ml_laplace_metropolis(s, conjugate_log_likelihood(c, s.mean[0]),
                                   conjugate_log_prior(c, s.mean[0]));
  return out->log_value;
}

}  // namespace

ConjugateCase ConjugateCase::exponential_gamma(std::vector<double> data, double shape,
                                               double rate) {
  ConjugateCase c;
  c.kind = ConjugateKind::exponential_gamma;
  c.name = "exponential-gamma";
  c.data = std::move(data);
  c.prior_shape = shape;
  c.prior_rate = rate;
  return c;
}

ConjugateCase ConjugateCase::normal(std::vector<double> data, double sigma, double prior_mean,
                                    double prior_sd) {
  ConjugateCase c;
  c.kind = ConjugateKind::normal_known_variance;
  c.name = "normal";
  c.data = std::move(data);
  c.sigma = sigma;
  c.prior_mean = prior_mean;
  c.prior_sd = prior_sd;
  return c;
}

void validate(const ConjugateCase& c) {
  if (c.kind == ConjugateKind::exponential_gamma) {
    if (!(c.prior_shape > 0.0) || !(c.prior_rate > 0.0)) {
      throw UsageError("exponential-gamma case: prior shape and rate must be positive");
    }
    for (double x : c.data) {
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw UsageError("exponential-gamma case: data must be non-negative");
      }
    }
  } else {
    if (!(c.sigma > 0.0) || !(c.prior_sd > 0.0) || !std::isfinite(c.prior_mean)) {
      throw UsageError("normal case: sigma and prior sd must be positive");
    }
    for (double x : c.data) {
      if (!std::isfinite(x)) throw UsageError("normal case: data must be finite");
    }
  }
}

double conjugate_log_ml(const ConjugateCase& c) {
  validate(c);
  if (c.kind == ConjugateKind::normal_known_variance) {
    return normal_log_evidence(c.data, c.sigma, c.prior_mean, c.prior_sd);
  }
  const double a = c.prior_shape;
  const double b = c.prior_rate;
  const double n = static_cast<double>(c.data.size());
  return a * std::log(b) + std::lgamma(a + n) - std::lgamma(a) - (a + n) * std::log(b + sum(c.data));
}

double conjugate_log_ppd(const ConjugateCase& c) {
  validate(c);
  if (c.kind == ConjugateKind::normal_known_variance) {
    const NormalPosterior p = normal_posterior(c);
    return normal_log_evidence(c.data, c.sigma, p.mean, p.sd);
  }
  const double a = c.prior_shape;
  const double b = c.prior_rate;
  const double n = static_cast<double>(c.data.size());
  const double s = sum(c.data);
  return (a + n) * std::log(b + s) + std::lgamma(a + 2 * n) - std::lgamma(a + n) -
         (a + 2 * n) * std::log(b + 2 * s);
}

double conjugate_log_likelihood(const ConjugateCase& c, double param) {
  if (c.kind == ConjugateKind::exponential_gamma) {
    if (!(param > 0.0)) return -kInf;
    return static_cast<double>(c.data.size()) * std::log(param) - param * sum(c.data);
  }
  double ll = 0.0;
  for (double x : c.data) {
    const double z = (x - param) / c.sigma;
    ll += -kLnSqrtTwoPi - std::log(c.sigma) - 0.5 * z * z;
  }
  return ll;
}

double conjugate_log_prior(const ConjugateCase& c, double param) {
  if (c.kind == ConjugateKind::exponential_gamma) {
    return gamma_log_pdf(param, c.prior_shape, c.prior_rate);
  }
  const double z = (param - c.prior_mean) / c.prior_sd;
  return -kLnSqrtTwoPi - std::log(c.prior_sd) - 0.5 * z * z;
}

std::vector<double> sample_conjugate_prior(const ConjugateCase& c, std::size_t n,
                                           std::uint64_t seed) {
  validate(c);
  std::mt19937_64 rng(seed);
  std::vector<double> out(n);
  if (c.kind == ConjugateKind::exponential_gamma) {
    std::gamma_distribution<double> g(c.prior_shape, 1.0 / c.prior_rate);
    for (double& v : out) v = g(rng);
  } else {
    std::normal_distribution<double> g(c.prior_mean, c.prior_sd);
    for (double& v : out) v = g(rng);
  }
  return out;
}

std::vector<double> sample_conjugate_posterior(const ConjugateCase& c, std::size_t n,
                                               std::uint64_t seed) {
  validate(c);
  std::mt19937_64 rng(seed);
  std::vector<double> out(n);
  if (c.kind == ConjugateKind::exponential_gamma) {
    const double shape = c.prior_shape + static_cast<double>(c.data.size());
    const double rate = c.prior_rate + sum(c.data);
    std::gamma_distribution<double> g(shape, 1.0 / rate);
    for (double& v : out) v = g(rng);
  } else {
    const NormalPosterior p = normal_posterior(c);
    std::normal_distribution<double> g(p.mean, p.sd);
    for (double& v : out) v = g(rng);
  }
  return out;
}

std::vector<double> sample_normal_posterior_stratified(const ConjugateCase& c, std::size_t n,
                                                       std::uint64_t seed) {
  validate(c);
  if (c.kind != ConjugateKind::normal_known_variance) {
    throw UsageError("stratified posterior sampling is implemented for the normal case only");
  }
  const NormalPosterior p = normal_posterior(c);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    double prob = (static_cast<double>(t) + u(rng)) / static_cast<double>(n);
    prob = std::clamp(prob, 1e-300, 1.0 - 1e-16);
    out[t] = p.mean + p.sd * std_normal_quantile(prob);
  }
  return out;
}

SamplingTarget conjugate_target(const ConjugateCase& c) {
  validate(c);
  SamplingTarget t;
  t.dim = 1;
  t.log_likelihood = [c](std::span<const double> x) { return conjugate_log_likelihood(c, x[0]); };
  t.log_prior = [c](std::span<const double> x) {
    return x[0] > 0.0 ? conjugate_log_prior(c, x[0]) : -kInf;
  };
  if (c.kind == ConjugateKind::exponential_gamma) {
    t.prior_mean = {c.prior_shape / c.prior_rate};
    t.draw_prior = [c](std::mt19937_64& rng, std::span<double> out) {
      out[0] = std::gamma_distribution<double>(c.prior_shape, 1.0 / c.prior_rate)(rng);
    };
  } else {
    if (!(c.prior_mean > 0.0)) {
      throw UsageError("normal case: MCMC needs a positive prior mean");
    }
    t.prior_mean = {c.prior_mean};
    t.draw_prior = [c](std::mt19937_64& rng, std::span<double> out) {
      out[0] = std::normal_distribution<double>(c.prior_mean, c.prior_sd)(rng);
    };
  }
  return t;
}

namespace {

// ln of the Simpson sum over the grid; weights h/3 * (1,4,2,...,4,1) per axis.
double log_simpson(const DrawFunction& log_f, const std::vector<QuadratureAxis>& axes) {
  const std::size_t d = axes.size();
  std::vector<std::vector<double>> nodes(d), log_w(d);
  for (std::size_t a = 0; a < d; ++a) {
    const QuadratureAxis& ax = axes[a];
    const double h = (ax.upper - ax.lower) / static_cast<double>(ax.points - 1);
    for (std::size_t k = 0; k < ax.points; ++k) {
      nodes[a].push_back(ax.lower + h * static_cast<double>(k));
      const double w = (k == 0 || k + 1 == ax.points) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
      log_w[a].push_back(std::log(w * h / 3.0));
    }
  }
  const std::size_t n0 = axes[0].points;
  const std::size_t n1 = d == 2 ? axes[1].points : 1;
  std::vector<double> grid(n0 * n1 * d);
  for (std::size_t i = 0; i < n0; ++i) {
    for (std::size_t j = 0; j < n1; ++j) {
      double* p = &grid[(i * n1 + j) * d];
      p[0] = nodes[0][i];
      if (d == 2) p[1] = nodes[1][j];
    }
  }
  std::vector<double> terms = evaluate_rows(log_f, grid, d, ExecPolicy::parallel);
  for (std::size_t i = 0; i < n0; ++i) {
    for (std::size_t j = 0; j < n1; ++j) {
      double& v = terms[i * n1 + j];
      if (std::isnan(v)) throw QuadratureError("quadrature: integrand is NaN");
      v += log_w[0][i] + (d == 2 ? log_w[1][j] : 0.0);
    }
  }
  return log_sum_exp(terms, ExecPolicy::parallel);
}

}  // namespace

double quadrature_log_ml(const DrawFunction& loglik, const DrawFunction& logprior,
                         const std::vector<QuadratureAxis>& axes) {
  if (axes.empty() || axes.size() > 2) {
    throw UsageError("quadrature_log_ml: supports 1 or 2 dimensions");
  }
  for (const QuadratureAxis& ax : axes) {
    if (!(ax.upper > ax.lower) || ax.points < 3 || ax.points % 2 == 0) {
      throw UsageError("quadrature_log_ml: each axis needs lower < upper and an odd count >= 3");
    }
  }
  const DrawFunction log_f = [&](std::span<const double> x) {
    const double lp = logprior(x);
    if (lp == -kInf) return -kInf;
    return lp + loglik(x);
  };
  const double inner = log_simpson(log_f, axes);
  if (!std::isfinite(inner)) {
    throw QuadratureError("quadrature_log_ml: integrand has no mass inside the bounds");
  }
  std::vector<QuadratureAxis> wide = axes;
  for (QuadratureAxis& ax : wide) {
    const double width = ax.upper - ax.lower;
    ax.lower -= width;
    ax.upper += width;
    ax.points = 3 * (ax.points - 1) + 1;
  }
  const double outer = log_simpson(log_f, wide);
  const double tail = -std::expm1(inner - outer);
  if (!(std::fabs(tail) < kQuadratureTailTolerance)) {
    throw QuadratureError("quadrature_log_ml: " + std::to_string(tail) +
                          " of the mass lies outside the bounds; widen them");
  }
  return inner;
}

ValidationPlan ValidationPlan::full() { return {}; }

ValidationPlan ValidationPlan::quick() {
  ValidationPlan p;
  p.simple_mc_draws = 10000;
  p.simple_mc_tol = 0.2;
  p.harmonic_draws = 10000;
  p.harmonic_tol = 1.0;
  p.harmonic_mcmc_tol = 1.0;
  p.ppd_draws = 10000;
  p.ppd_tol = 0.1;
  p.laplace_draws = 10000;
  p.laplace_tol = 1e-2;
  p.laplace_mcmc_tol = 0.1;
  p.mcmc_burn_in = 2000;
  p.calibration_draws = 2500;
  p.calibration_rhat_max = 1.1;
  p.calibration_ks_max = 0.05;
  return p;
}

std::vector<ValidationRow> validate_estimators(const ConjugateCase& c,
                                               const ValidationOptions& options) {
  validate(c);
  const ValidationPlan& plan = options.plan;
  const double truth = conjugate_log_ml(c);
  const double truth_ppd = conjugate_log_ppd(c);
  std::vector<ValidationRow> rows;

  {
    const auto prior = sample_conjugate_prior(c, plan.simple_mc_draws,
                                              chain_seed(options.seed, kPriorStream));
    const auto ll = log_liks_of(c, prior);
    rows.push_back(estimator_row(c, log_ml_simple_mc(ll), "direct", truth, plan.simple_mc_tol));
    // The PPD arithmetic applied to prior draws estimates the evidence.
    rows.push_back(estimator_row(c, log_ppd(ll), "direct-prior-draws", truth, plan.simple_mc_tol));
  }
  {
    const std::size_t n = std::max(plan.harmonic_draws, plan.ppd_draws);
    const auto post = sample_conjugate_posterior(c, n, chain_seed(options.seed, kPosteriorStream));
    const auto ll = log_liks_of(c, post);
    rows.push_back(estimator_row(
        c, log_ml_harmonic(std::span(ll).first(plan.harmonic_draws)), "direct", truth,
        plan.harmonic_tol));
    rows.push_back(estimator_row(c, log_ppd(std::span(ll).first(plan.ppd_draws)), "direct",
                                 truth_ppd, plan.ppd_tol));
    if (c.kind == ConjugateKind::normal_known_variance) {
      LogMarginal lm;
      laplace_from_values(c, std::span(post).first(plan.laplace_draws), &lm);
      // i.i.d. draws: the sd estimate alone carries ~1/sqrt(2N) relative noise.
      rows.push_back(estimator_row(c, lm, "direct-iid", truth, plan.laplace_mcmc_tol));
    }
  }
  if (c.kind == ConjugateKind::normal_known_variance) {
    const auto post = sample_normal_posterior_stratified(
        c, plan.laplace_draws, chain_seed(options.seed, kStratifiedStream));
    LogMarginal lm;
    laplace_from_values(c, post, &lm);
    rows.push_back(estimator_row(c, lm, "direct-stratified", truth, plan.laplace_tol));
  }

  const bool mcmc_ok = c.kind == ConjugateKind::exponential_gamma ||
                       normal_posterior(c).mean > 10.0 * normal_posterior(c).sd;
  if (mcmc_ok) {
    SamplerConfig cfg;
    cfg.n_chains = 1;
    cfg.burn_in = plan.mcmc_burn_in;
    cfg.n_keep = std::max({plan.harmonic_draws, plan.ppd_draws, plan.laplace_draws});
    cfg.seed = chain_seed(options.seed, kMcmcStream);
    cfg.jacobian_sign = options.jacobian_sign;
    const PosteriorDraws draws = run_chain(conjugate_target(c), cfg, 0);
    const std::span<const double> ll(draws.log_liks);
    rows.push_back(estimator_row(c, log_ml_harmonic(ll.first(plan.harmonic_draws)), "mcmc",
                                 truth, plan.harmonic_mcmc_tol));
    rows.push_back(
        estimator_row(c, log_ppd(ll.first(plan.ppd_draws)), "mcmc", truth_ppd, plan.ppd_tol));
    if (c.kind == ConjugateKind::normal_known_variance) {
      LogMarginal lm;
      laplace_from_values(c, std::span(draws.values).first(plan.laplace_draws), &lm);
      rows.push_back(estimator_row(c, lm, "mcmc", truth, plan.laplace_mcmc_tol));
    }
  }
  return rows;
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw UsageError("ks_distance: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

std::vector<ValidationRow> validate_sampler(const ValidationOptions& options) {
  const ValidationPlan& plan = options.plan;
  SamplingTarget t;
  t.dim = 1;
  t.log_likelihood = [](std::span<const double> x) { return std::log(x[0]) - x[0]; };
  t.log_prior = [](std::span<const double> x) { return x[0] > 0.0 ? 0.0 : -kInf; };
  t.prior_mean = {2.0};
  t.draw_prior = [](std::mt19937_64& rng, std::span<double> out) {
    out[0] = std::gamma_distribution<double>(2.0, 1.0)(rng);
  };
  SamplerConfig cfg;
  cfg.n_chains = plan.calibration_chains;
  cfg.burn_in = plan.mcmc_burn_in;
  cfg.n_keep = plan.calibration_draws;
  cfg.seed = chain_seed(options.seed, kCalibrationStream);
  cfg.jacobian_sign = options.jacobian_sign;
  const auto chains = run_chains(t, cfg);
  const PosteriorDraws pooled = pool_chains(chains);
  const ChainDiagnostics diag = diagnose(chains);
  const PosteriorSummary s = summarize(pooled);

  // Standard error of the sd from batch means of the squared deviations.
  double var_se2 = 0.0;
  for (const PosteriorDraws& ch : chains) {
    std::vector<double> sq(ch.size());
    for (std::size_t i = 0; i < ch.size(); ++i) {
      sq[i] = (ch.values[i] - s.mean[0]) * (ch.values[i] - s.mean[0]);
    }
    const double se = mc_error(sq);
    var_se2 += se * se;
  }
  const double var_se = std::sqrt(var_se2) / static_cast<double>(chains.size());
  const double sd_se = var_se / (2.0 * s.sd[0]);

  ConjugateCase label;
  label.name = "gamma(2,1)";
  const std::size_t n = pooled.size();
  const double k = plan.calibration_se_multiple;
  std::vector<ValidationRow> rows;
  rows.push_back(make_row(label, "mean", "sampler", n, s.mean[0], 2.0, k * diag.mc_error[0]));
  rows.push_back(make_row(label, "sd", "sampler", n, s.sd[0], std::sqrt(2.0), k * sd_se));
  ValidationRow rhat = make_row(label, "split_rhat", "sampler", n, diag.r_hat[0], 1.0, 0.0);
  rhat.tolerance = plan.calibration_rhat_max - 1.0;
  rhat.pass = diag.r_hat[0] < plan.calibration_rhat_max;
  rows.push_back(rhat);
  const double ks = ks_distance(pooled.values, [](double x) {
    return x <= 0.0 ? 0.0 : -std::expm1(-x) - x * std::exp(-x);
  });
  rows.push_back(make_row(label, "ks_distance", "sampler", n, ks, 0.0, plan.calibration_ks_max));
  return rows;
}

std::vector<ValidationRow> run_oracle_suite(const ValidationOptions& options) {
  std::vector<ValidationRow> rows;
  const ConjugateCase expo = ConjugateCase::exponential_gamma({1.0, 2.0, 3.0}, 2.0, 1.0);
  const ConjugateCase gauss = ConjugateCase::normal({0.0}, 1.0, 0.0, 1.0);
  ConjugateCase shifted = ConjugateCase::normal({10.0}, 1.0, 10.0, 1.0);
  shifted.name = "normal-shifted";

  for (const ConjugateCase* c : {&expo, &gauss, static_cast<const ConjugateCase*>(&shifted)}) {
    auto r = validate_estimators(*c, options);
    rows.insert(rows.end(), r.begin(), r.end());
  }

  const auto quad_row = [&](const ConjugateCase& c, const std::vector<QuadratureAxis>& axes) {
    const DrawFunction ll = [&](std::span<const double> x) {
      return conjugate_log_likelihood(c, x[0]);
    };
    const DrawFunction lp = [&](std::span<const double> x) {
      if (c.kind == ConjugateKind::exponential_gamma && !(x[0] > 0.0)) return -kInf;
      return conjugate_log_prior(c, x[0]);
    };
    std::size_t n = 1;
    for (const auto& ax : axes) n *= ax.points;
    double estimate = std::numeric_limits<double>::quiet_NaN();
    try {
      estimate = quadrature_log_ml(ll, lp, axes);
    } catch (const QuadratureError&) {
      // reported as a failed row
    }
    return make_row(c, "quadrature", "quadrature", n, estimate, conjugate_log_ml(c),
                    options.plan.quadrature_tol);
  };
  rows.push_back(quad_row(expo, {{0.0, 20.0, 4001}}));
  rows.push_back(quad_row(gauss, {{-12.0, 12.0, 4001}}));

  auto cal = validate_sampler(options);
  rows.insert(rows.end(), cal.begin(), cal.end());
  return rows;
}

void write_validation_csv(std::ostream& os, const std::vector<ValidationRow>& rows) {
  os << "case,estimator,method,n,estimate,truth,error,tolerance,pass\n";
  for (const ValidationRow& r : rows) {
    os << r.case_name << ',' << r.estimator << ',' << r.method << ',' << r.n << ','
       << csv::exact(r.estimate) << ',' << csv::exact(r.truth) << ',' << csv::exact(r.error)
       << ',' << csv::exact(r.tolerance) << ',' << (r.pass ? "true" : "false") << '\n';
  }
}

}  // namespace altbayes
