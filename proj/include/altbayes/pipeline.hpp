#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "altbayes/diagnostics.hpp"
#include "altbayes/report.hpp"
#include "altbayes/run_config.hpp"
#include "altbayes/selection.hpp"

namespace altbayes {

inline constexpr double kRhatGate = 1.1;
inline constexpr double kMcErrorRatioGate = 0.05;
inline constexpr std::size_t kHistogramBins = 50;

struct FitResult {
  RunConfig config;
  std::vector<PosteriorDraws> chains;
  PosteriorDraws pooled;
  ChainDiagnostics diagnostics;
  PosteriorSummary summary;
  double log_lik_at_mean = 0.0;
  double log_prior_at_mean = 0.0;
  std::optional<DicResult> dic;
  std::vector<LogMarginal> log_mls;  // in config.estimators order
  // Diagnostic gate failures and small-sample notes; never fatal.
  std::vector<std::string> warnings;
  bool diagnostics_pass = false;
};

// Samples the posterior of config.model on `data` (re-derived under
// config.v_transform), then computes diagnostics, DIC and every requested
// estimator. Simple MC draws use a sub-seed of the sampler seed.
FitResult fit_model(const RunConfig& config, const Dataset& data);

ModelEvidence to_evidence(const FitResult& fit);

// Summary JSON: configuration, per-parameter moments, quantiles, R-hat,
// MC error, acceptance rates, DIC, log marginal likelihoods, warnings.
void write_summary_json(std::ostream& os, const FitResult& fit, const Dataset& data);

// parameter,bin,lower,upper,count with kHistogramBins equal-width bins
// spanning the pooled draws of each parameter.
void write_histogram_csv(std::ostream& os, const FitResult& fit,
                         std::size_t bins = kHistogramBins);

// draws.csv, summary.json and histogram.csv in `dir`.
std::vector<std::filesystem::path> write_fit_files(const std::filesystem::path& dir,
                                                   const FitResult& fit, const Dataset& data);

// Fits every configuration (sequentially; each fit runs its chains in
// parallel) and assembles the report with equal prior model probabilities.
// All configurations must request the same estimators.
SelectionReport compare_models(const std::vector<RunConfig>& configs, const Dataset& data,
                               std::vector<FitResult>* fits = nullptr);

// Report over supplied log marginal likelihoods; no sampling.
SelectionReport compare_from_log_ml(const LogMlTable& table);

}  // namespace altbayes
