#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "altbayes/mcmc.hpp"

namespace altbayes {

/// Returned by gelman_rubin when every chain has zero variance.
inline constexpr double kDegenerateRhat = std::numeric_limits<double>::infinity();

// Potential scale reduction factor with the Brooks-Gelman degrees-of-freedom
// correction, sqrt((d+3)/(d+1) * V/W). Chains must have equal length >= 10.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

// Splits every chain in half and applies gelman_rubin to the halves
// (used when only one chain is available, or as the stricter variant).
double split_gelman_rubin(const std::vector<std::vector<double>>& chains);

// Batch-means standard error of the mean with floor(sqrt(N)) batches.
// Throws UsageError for fewer than 100 values.
double mc_error(std::span<const double> draws);

struct ChainDiagnostics {
  std::vector<double> r_hat;
  std::vector<double> mc_error;
  std::vector<double> posterior_sd;
  std::vector<double> mc_error_ratio;
  bool split_chain = false;  // only one chain: r_hat compares its two halves
};

// Split R-hat (every chain halved, so one chain still gets a value) and
// batch-means error of the pooled draws, per parameter.
ChainDiagnostics diagnose(const std::vector<PosteriorDraws>& chains);

struct PosteriorSummary {
  std::size_t dim = 0;
  std::size_t n = 0;
  std::vector<double> mean;
  std::vector<double> sd;
  std::vector<double> correlation;  // dim x dim, row-major
  std::vector<double> q025, median, q975;
  bool degenerate_sd = false;  // some sd == 0; its correlations set to 0

  double corr(std::size_t i, std::size_t j) const { return correlation[i * dim + j]; }
};

// Moments and quantiles of pooled draws on the original scale.
PosteriorSummary summarize(const PosteriorDraws& draws);

// Row-major n x dim overload for draw sets not produced by the sampler.
PosteriorSummary summarize(std::span<const double> values, std::size_t dim);

// Sample quantile with linear interpolation (type 7).
double quantile(std::vector<double> values, double p);

}  // namespace altbayes
