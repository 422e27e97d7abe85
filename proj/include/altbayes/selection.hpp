#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "altbayes/diagnostics.hpp"

namespace altbayes {

struct DicResult {
  double d_bar = 0.0;  // posterior mean deviance
  double d_hat = 0.0;  // deviance at the posterior mean
  double p_d = 0.0;
  double dic = 0.0;
};

// Throws UsageError for fewer than 2 draws or any non-finite input.
DicResult dic(std::span<const double> log_liks, double log_lik_at_mean);

enum class Estimator { simple_mc, harmonic_mean, laplace_metropolis, ppd };

std::string_view to_string(Estimator e);
Estimator parse_estimator(std::string_view s);
// Comma-separated list, e.g. "harmonic_mean,ppd". Duplicates are rejected.
std::vector<Estimator> parse_estimator_list(std::string_view s);

/// A log marginal-likelihood estimate, or the reason there is none.
struct LogMarginal {
  Estimator estimator = Estimator::simple_mc;
  double log_value = 0.0;
  std::size_t n_samples = 0;
  bool failed = false;
  std::string message;  // failure reason or diagnostic note
  // simple_mc and ppd: share of the total weight carried by the largest term.
  // harmonic_mean: share of the reciprocal weight carried by the smallest
  // likelihood. NaN when not applicable.
  double max_weight_fraction = 0.0;
  bool unstable = false;
  // laplace_metropolis: largest / smallest eigenvalue of R.
  double condition_number = 0.0;
};

// ln( (1/N) sum L(theta_t) ) over prior draws. Fails when every term is -inf.
LogMarginal log_ml_simple_mc(std::span<const double> prior_draw_log_liks);

// ln N - ln sum 1/L(theta_t) over posterior draws. Fails on any -inf term;
// flagged unstable when the smallest likelihood carries > 50% of the
// reciprocal weight.
LogMarginal log_ml_harmonic(std::span<const double> posterior_log_liks);

// (d/2) ln 2 pi + (1/2) ln|R| + sum ln s_l + loglik(mean) + logprior(mean),
// with R, s and the mean taken from `summary`. Fails when some sd is 0 or
// the Cholesky factorization of R fails even with 1e-10 added to the diagonal.
LogMarginal log_ml_laplace_metropolis(const PosteriorSummary& summary,
                                      double log_lik_at_mean, double log_prior_at_mean);

// Posterior mean of the likelihood, ln( (1/N) sum L(theta_t) ).
LogMarginal log_ppd(std::span<const double> posterior_log_liks);

struct BayesFactor {
  double log_bf = 0.0;     // ln B_ij
  double bf = 1.0;         // may be 0 or inf when ln B_ij is large
  double two_ln_bf = 0.0;  // 2 ln B_ij
};

BayesFactor bayes_factor(double log_ml_i, double log_ml_j);

enum class EvidenceStrength { negligible, positive, strong, very_strong };

struct Interpretation {
  EvidenceStrength strength = EvidenceStrength::negligible;
  int favored = 0;  // +1 model i, -1 model j, 0 neither (2 ln B == 0)
};

// Kass-Raftery scale on |2 ln B|: [0,2) negligible, [2,6) positive,
// [6,10) strong, >= 10 very strong.
Interpretation interpret_2lnB(double two_ln_bf);

// "Strong evidence for model 3"; "Negligible evidence" when nothing is favored.
std::string interpretation_label(const Interpretation& interp, std::size_t model_i,
                                 std::size_t model_j);

// f(m_i | x) = [1 + ((1 - p)/p) / B_ij]^-1 for a prior probability p of
// model i within the pair. Throws UsageError unless 0 < p < 1 and B_ij > 0.
double posterior_model_prob(double prior_i, double bf_ij);
// Same, from ln B_ij, so very large or small Bayes factors do not overflow.
double posterior_model_prob_log(double prior_i, double log_bf_ij);

/// Everything one model contributes to a comparison.
struct ModelEvidence {
  std::string label;
  std::optional<DicResult> dic;
  std::vector<LogMarginal> log_mls;  // at most one per estimator

  const LogMarginal* find(Estimator e) const;
};

struct PairwiseEntry {
  std::size_t i = 0;  // 0-based model indices, i < j
  std::size_t j = 0;
  Estimator estimator = Estimator::simple_mc;
  bool available = false;  // false when either model's estimate failed
  BayesFactor bf;
  std::string interpretation;
  double pmp_i = 0.0;
  double pmp_j = 0.0;
};

struct SelectionReport {
  std::vector<ModelEvidence> models;
  std::vector<double> model_priors;
  std::vector<Estimator> estimators;
  std::vector<PairwiseEntry> pairs;  // ordered by (i, j), then estimator
  std::map<std::string, std::string> metadata;

  // "1-2" style, 1-based.
  static std::string pair_label(std::size_t i, std::size_t j);
};

// Builds every pairwise Bayes factor, interpretation and posterior model
// probability. `model_priors` defaults to equal prior probabilities; within a
// pair, p = f(m_i) / (f(m_i) + f(m_j)). An estimator missing or failed for
// one model makes the affected cells unavailable rather than aborting.
SelectionReport selection_report(std::vector<ModelEvidence> models,
                                 std::vector<Estimator> estimators,
                                 std::vector<double> model_priors = {});

}  // namespace altbayes
