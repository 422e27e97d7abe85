#include "altbayes/selection.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "altbayes/kernels.hpp"
#include "altbayes/numerics.hpp"

namespace altbayes {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kLaplaceJitter = 1e-10;
constexpr std::size_t kParallelThreshold = 1 << 16;

ExecPolicy policy_for(std::size_t n) {
  return n >= kParallelThreshold ? ExecPolicy::parallel : ExecPolicy::serial;
}

LogMarginal failure(Estimator e, std::size_t n, std::string message) {
  LogMarginal out;
  out.estimator = e;
  out.n_samples = n;
  out.failed = true;
  out.log_value = kNaN;
  out.max_weight_fraction = kNaN;
  out.condition_number = kNaN;
  out.message = std::move(message);
  return out;
}

// Mean-of-likelihood estimate shared by simple MC (prior draws) and PPD
// (posterior draws).
LogMarginal mean_likelihood(Estimator e, std::span<const double> log_liks) {
  if (log_liks.empty()) throw UsageError(std::string(to_string(e)) + ": no draws");
  for (double v : log_liks) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      throw UsageError(std::string(to_string(e)) + ": log-likelihood is NaN or +inf");
    }
  }
  const double lse = log_sum_exp(log_liks, policy_for(log_liks.size()));
  if (lse == -std::numeric_limits<double>::infinity()) {
    return failure(e, log_liks.size(), "every draw has zero likelihood");
  }
  LogMarginal out;
  out.estimator = e;
  out.n_samples = log_liks.size();
  out.log_value = lse - std::log(static_cast<double>(log_liks.size()));
  out.max_weight_fraction = std::exp(*std::max_element(log_liks.begin(), log_liks.end()) - lse);
  out.condition_number = kNaN;
  return out;
}

}  // namespace

DicResult dic(std::span<const double> log_liks, double log_lik_at_mean) {
  if (log_liks.size() < 2) throw UsageError("dic: need at least 2 draws");
  if (!std::isfinite(log_lik_at_mean)) throw UsageError("dic: log-likelihood at mean is not finite");
  double sum = 0.0;
  for (double v : log_liks) {
    if (!std::isfinite(v)) throw UsageError("dic: non-finite log-likelihood in draws");
    sum += -2.0 * v;
  }
  DicResult r;
  r.d_bar = sum / static_cast<double>(log_liks.size());
  r.d_hat = -2.0 * log_lik_at_mean;
  r.p_d = r.d_bar - r.d_hat;
  r.dic = r.d_bar + r.p_d;
  return r;
}

std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::simple_mc: return "simple_mc";
    case Estimator::harmonic_mean: return "harmonic_mean";
    case Estimator::laplace_metropolis: return "laplace_metropolis";
    case Estimator::ppd: return "ppd";
  }
  return "?";
}

Estimator parse_estimator(std::string_view s) {
  for (Estimator e : {Estimator::simple_mc, Estimator::harmonic_mean,
                      Estimator::laplace_metropolis, Estimator::ppd}) {
    if (s == to_string(e)) return e;
  }
  throw UsageError("unknown estimator '" + std::string(s) +
                   "' (expected simple_mc, harmonic_mean, laplace_metropolis or ppd)");
}

std::vector<Estimator> parse_estimator_list(std::string_view s) {
  std::vector<Estimator> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = std::min(s.find(',', start), s.size());
    std::string_view item = s.substr(start, comma - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    const Estimator e = parse_estimator(item);
    if (std::find(out.begin(), out.end(), e) != out.end()) {
      throw UsageError("estimator '" + std::string(item) + "' listed twice");
    }
    out.push_back(e);
    start = comma + 1;
  }
  return out;
}

LogMarginal log_ml_simple_mc(std::span<const double> prior_draw_log_liks) {
  return mean_likelihood(Estimator::simple_mc, prior_draw_log_liks);
}

LogMarginal log_ppd(std::span<const double> posterior_log_liks) {
  return mean_likelihood(Estimator::ppd, posterior_log_liks);
}

LogMarginal log_ml_harmonic(std::span<const double> posterior_log_liks) {
  const std::size_t n = posterior_log_liks.size();
  if (n == 0) throw UsageError("harmonic_mean: no draws");
  std::vector<double> neg(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double v = posterior_log_liks[t];
    if (std::isnan(v)) throw UsageError("harmonic_mean: NaN log-likelihood");
    if (!std::isfinite(v)) {
      return failure(Estimator::harmonic_mean, n, "a draw has zero or infinite likelihood");
    }
    neg[t] = -v;
  }
  const double lse = log_sum_exp(neg, policy_for(n));
  LogMarginal out;
  out.estimator = Estimator::harmonic_mean;
  out.n_samples = n;
  out.log_value = std::log(static_cast<double>(n)) - lse;
  out.max_weight_fraction = std::exp(*std::max_element(neg.begin(), neg.end()) - lse);
  out.unstable = out.max_weight_fraction > 0.5;
  out.condition_number = kNaN;
  if (out.unstable) out.message = "smallest likelihood carries most of the reciprocal weight";
  return out;
}

LogMarginal log_ml_laplace_metropolis(const PosteriorSummary& summary, double log_lik_at_mean,
                                      double log_prior_at_mean) {
  const std::size_t d = summary.dim;
  if (d == 0 || summary.sd.size() != d || summary.correlation.size() != d * d) {
    throw UsageError("laplace_metropolis: malformed posterior summary");
  }
  if (!std::isfinite(log_lik_at_mean) || !std::isfinite(log_prior_at_mean)) {
    return failure(Estimator::laplace_metropolis, summary.n,
                   "log posterior is not finite at the posterior mean");
  }
  double sum_log_sd = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    if (!(summary.sd[k] > 0.0) || !std::isfinite(summary.sd[k])) {
      return failure(Estimator::laplace_metropolis, summary.n,
                     "posterior sd of parameter " + std::to_string(k + 1) + " is not positive");
    }
    sum_log_sd += std::log(summary.sd[k]);
  }

  const auto n = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) r(i, j) = summary.corr(i, j);
  }
  const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
                                  r, Eigen::EigenvaluesOnly).eigenvalues();
  const double condition = eig.minCoeff() > 0.0 ? eig.maxCoeff() / eig.minCoeff()
                                                : std::numeric_limits<double>::infinity();

  Eigen::LLT<Eigen::MatrixXd> llt(r);
  bool jittered = false;
  if (llt.info() != Eigen::Success) {
    llt.compute(r + kLaplaceJitter * Eigen::MatrixXd::Identity(n, n));
    jittered = true;
  }
  if (llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "correlation matrix is not positive definite (smallest eigenvalue "
        << eig.minCoeff() << ")";
    LogMarginal out = failure(Estimator::laplace_metropolis, summary.n, msg.str());
    out.condition_number = condition;
    return out;
  }
  const Eigen::MatrixXd l = llt.matrixL();
  double log_det_r = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det_r += 2.0 * std::log(l(i, i));

  LogMarginal out;
  out.estimator = Estimator::laplace_metropolis;
  out.n_samples = summary.n;
  out.log_value = 0.5 * static_cast<double>(d) * kLnTwoPi + 0.5 * log_det_r + sum_log_sd +
                  log_lik_at_mean + log_prior_at_mean;
  out.max_weight_fraction = kNaN;
  out.condition_number = condition;
  if (jittered) out.message = "1e-10 added to the diagonal of R";
  return out;
}

BayesFactor bayes_factor(double log_ml_i, double log_ml_j) {
  if (!std::isfinite(log_ml_i) || !std::isfinite(log_ml_j)) {
    throw UsageError("bayes_factor: log marginal likelihoods must be finite");
  }
  BayesFactor b;
  b.log_bf = log_ml_i - log_ml_j;
  b.bf = std::exp(b.log_bf);
  b.two_ln_bf = 2.0 * b.log_bf;
  return b;
}

Interpretation interpret_2lnB(double two_ln_bf) {
  if (std::isnan(two_ln_bf)) throw UsageError("interpret_2lnB: NaN input");
  Interpretation out;
  const double a = std::fabs(two_ln_bf);
  if (a >= 10.0) {
    out.strength = EvidenceStrength::very_strong;
  } else if (a >= 6.0) {
    out.strength = EvidenceStrength::strong;
  } else if (a >= 2.0) {
    out.strength = EvidenceStrength::positive;
  } else {
    out.strength = EvidenceStrength::negligible;
  }
  out.favored = two_ln_bf > 0.0 ? 1 : (two_ln_bf < 0.0 ? -1 : 0);
  return out;
}

std::string interpretation_label(const Interpretation& interp, std::size_t model_i,
                                 std::size_t model_j) {
  std::string s;
  switch (interp.strength) {
    case EvidenceStrength::negligible: s = "Negligible"; break;
    case EvidenceStrength::positive: s = "Positive"; break;
    case EvidenceStrength::strong: s = "Strong"; break;
    case EvidenceStrength::very_strong: s = "Very strong"; break;
  }
  s += " evidence";
  if (interp.favored != 0) {
    s += " for model " + std::to_string(interp.favored > 0 ? model_i : model_j);
  }
  return s;
}

double posterior_model_prob_log(double prior_i, double log_bf_ij) {
  if (!(prior_i > 0.0 && prior_i < 1.0)) {
    throw UsageError("posterior_model_prob: prior probability must lie strictly in (0, 1)");
  }
  if (std::isnan(log_bf_ij)) throw UsageError("posterior_model_prob: NaN Bayes factor");
  // 1 / (1 + exp(z)) with z = ln((1-p)/p) - ln B
  const double z = std::log1p(-prior_i) - std::log(prior_i) - log_bf_ij;
  if (z > 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

double posterior_model_prob(double prior_i, double bf_ij) {
  if (!(bf_ij > 0.0)) throw UsageError("posterior_model_prob: Bayes factor must be positive");
  return posterior_model_prob_log(prior_i, std::log(bf_ij));
}

const LogMarginal* ModelEvidence::find(Estimator e) const {
  for (const LogMarginal& m : log_mls) {
    if (m.estimator == e) return &m;
  }
  return nullptr;
}

std::string SelectionReport::pair_label(std::size_t i, std::size_t j) {
  return std::to_string(i + 1) + "-" + std::to_string(j + 1);
}

SelectionReport selection_report(std::vector<ModelEvidence> models,
                                 std::vector<Estimator> estimators,
                                 std::vector<double> model_priors) {
  if (models.size() < 2) throw UsageError("selection_report: need at least 2 models");
  if (model_priors.empty()) {
    model_priors.assign(models.size(), 1.0 / static_cast<double>(models.size()));
  }
  if (model_priors.size() != models.size()) {
    throw UsageError("selection_report: one prior probability per model is required");
  }
  double total = 0.0;
  for (double p : model_priors) {
    if (!(p > 0.0 && p < 1.0)) {
      throw UsageError("selection_report: prior model probabilities must lie in (0, 1)");
    }
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    throw UsageError("selection_report: prior model probabilities must sum to 1");
  }

  SelectionReport rep;
  rep.models = std::move(models);
  rep.model_priors = std::move(model_priors);
  rep.estimators = std::move(estimators);
  const std::size_t m = rep.models.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      for (Estimator e : rep.estimators) {
        PairwiseEntry p;
        p.i = i;
        p.j = j;
        p.estimator = e;
        const LogMarginal* a = rep.models[i].find(e);
        const LogMarginal* b = rep.models[j].find(e);
        p.available = a && b && !a->failed && !b->failed;
        if (p.available) {
          p.bf = bayes_factor(a->log_value, b->log_value);
          p.interpretation = interpretation_label(interpret_2lnB(p.bf.two_ln_bf), i + 1, j + 1);
          const double prior = rep.model_priors[i] / (rep.model_priors[i] + rep.model_priors[j]);
          p.pmp_i = posterior_model_prob_log(prior, p.bf.log_bf);
          p.pmp_j = posterior_model_prob_log(1.0 - prior, -p.bf.log_bf);
        } else {
          p.bf = {kNaN, kNaN, kNaN};
          p.pmp_i = p.pmp_j = kNaN;
          const std::size_t missing = (a && !a->failed) ? j : i;
          p.interpretation = std::string(to_string(e)) + " unavailable for model " +
                             std::to_string(missing + 1);
        }
        rep.pairs.push_back(std::move(p));
      }
    }
  }
  return rep;
}

}  // namespace altbayes
