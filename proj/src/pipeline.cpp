#include "altbayes/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "altbayes/kernels.hpp"
#include "altbayes/numerics.hpp"
#include "altbayes/report.hpp"
#include "csv_util.hpp"
#include "json.hpp"

namespace altbayes {

namespace {

using nlohmann::json;

// Sub-seed stream for the simple Monte Carlo prior draws.
constexpr std::size_t kPriorDrawStream = 1000003;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

void gate_warnings(FitResult& r) {
  const auto names = param_names(r.config.model);
  const std::size_t per_chain = r.chains.front().size();
  r.diagnostics_pass = true;
  if (per_chain < 100) {
    r.warnings.push_back("only " + std::to_string(per_chain) +
                         " draws per chain; R-hat and MC error are unreliable below length 100");
    r.diagnostics_pass = false;
  }
  for (std::size_t k = 0; k < kParamDim; ++k) {
    const double rh = r.diagnostics.r_hat[k];
    const double ratio = r.diagnostics.mc_error_ratio[k];
    if (std::isfinite(rh) && rh >= kRhatGate) {
      r.warnings.push_back(names[k] + ": R-hat " + fmt(rh) + " >= 1.1");
      r.diagnostics_pass = false;
    }
    if (std::isfinite(ratio) && ratio >= kMcErrorRatioGate) {
      r.warnings.push_back(names[k] + ": MC error is " + fmt(100 * ratio) +
                           "% of the posterior sd (>= 5%)");
      r.diagnostics_pass = false;
    }
  }
  if (r.diagnostics.split_chain) {
    r.warnings.push_back("single chain: R-hat computed from split halves");
  }
}

LogMarginal estimate(Estimator e, const FitResult& r, const Dataset& data) {
  switch (e) {
    case Estimator::simple_mc: {
      const auto prior_draws =
          sample_prior(r.config.model, r.config.prior, r.config.simple_mc_draws,
                       chain_seed(r.config.sampler.seed, kPriorDrawStream));
      std::vector<double> rows;
      rows.reserve(prior_draws.size() * kParamDim);
      for (const ParamVector& p : prior_draws) {
        const auto v = p.values();
        rows.insert(rows.end(), v.begin(), v.end());
      }
      const auto ll = batch_log_likelihood(data, r.config.model, rows, ExecPolicy::parallel);
      return log_ml_simple_mc(ll);
    }
    case Estimator::harmonic_mean: return log_ml_harmonic(r.pooled.log_liks);
    case Estimator::laplace_metropolis:
      return log_ml_laplace_metropolis(r.summary, r.log_lik_at_mean, r.log_prior_at_mean);
    case Estimator::ppd: return log_ppd(r.pooled.log_liks);
  }
  throw UsageError("unknown estimator");
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

}  // namespace

FitResult fit_model(const RunConfig& config, const Dataset& data_in) {
  validate(config);
  const Dataset data = with_v_transform(data_in, config.v_transform);
  validate(data);

  FitResult r;
  r.config = config;
  const SamplingTarget target = make_alt_target(data, config.prior, config.model);
  r.chains = run_chains(target, config.sampler);
  r.pooled = pool_chains(r.chains);
  r.diagnostics = diagnose(r.chains);
  r.summary = summarize(r.pooled);
  gate_warnings(r);

  const ParamVector at_mean = ParamVector::from_values(config.model, r.summary.mean);
  r.log_lik_at_mean = log_likelihood(at_mean, data);
  r.log_prior_at_mean = log_prior(at_mean, config.prior);
  if (std::isfinite(r.log_lik_at_mean) && r.pooled.size() >= 2) {
    r.dic = dic(r.pooled.log_liks, r.log_lik_at_mean);
  } else {
    r.warnings.push_back("DIC unavailable: log-likelihood at the posterior mean is not finite");
  }
  for (Estimator e : config.estimators) r.log_mls.push_back(estimate(e, r, data));
  for (const LogMarginal& m : r.log_mls) {
    if (m.failed) {
      r.warnings.push_back(std::string(to_string(m.estimator)) + " failed: " + m.message);
    } else if (m.unstable) {
      r.warnings.push_back(std::string(to_string(m.estimator)) + ": " + m.message);
    }
  }
  return r;
}

ModelEvidence to_evidence(const FitResult& fit) {
  return {fit.config.label, fit.dic, fit.log_mls};
}

void write_summary_json(std::ostream& os, const FitResult& fit, const Dataset& data) {
  const auto names = param_names(fit.config.model);
  json j;
  j["label"] = fit.config.label;
  j["model"] = to_string(fit.config.model);
  j["v_transform"] = to_string(fit.config.v_transform);
  j["time_unit"] = data.time_unit;
  j["config"] = json::parse(run_config_to_json(fit.config));
  j["n_chains"] = fit.chains.size();
  j["n_draws"] = fit.pooled.size();
  j["parameters"] = json::array();
  for (std::size_t k = 0; k < kParamDim; ++k) {
    j["parameters"].push_back({{"name", names[k]},
                               {"mean", fit.summary.mean[k]},
                               {"sd", fit.summary.sd[k]},
                               {"q025", fit.summary.q025[k]},
                               {"median", fit.summary.median[k]},
                               {"q975", fit.summary.q975[k]},
                               {"r_hat", number_or_null(fit.diagnostics.r_hat[k])},
                               {"mc_error", number_or_null(fit.diagnostics.mc_error[k])},
                               {"mc_error_ratio", number_or_null(fit.diagnostics.mc_error_ratio[k])}});
  }
  j["r_hat_split_chain"] = fit.diagnostics.split_chain;
  json corr = json::array();
  for (std::size_t a = 0; a < kParamDim; ++a) {
    json row = json::array();
    for (std::size_t b = 0; b < kParamDim; ++b) row.push_back(fit.summary.corr(a, b));
    corr.push_back(row);
  }
  j["correlation"] = corr;
  j["acceptance_rate"] = json::array();
  j["chain_seeds"] = json::array();
  for (const PosteriorDraws& c : fit.chains) {
    j["acceptance_rate"].push_back(c.acceptance_rate);
    j["chain_seeds"].push_back(c.seed);
  }
  j["log_lik_at_mean"] = number_or_null(fit.log_lik_at_mean);
  j["log_prior_at_mean"] = number_or_null(fit.log_prior_at_mean);
  if (fit.dic) {
    j["dic"] = {{"d_bar", fit.dic->d_bar},
                {"d_hat", fit.dic->d_hat},
                {"p_d", fit.dic->p_d},
                {"dic", fit.dic->dic}};
  } else {
    j["dic"] = nullptr;
  }
  j["log_ml"] = json::array();
  for (const LogMarginal& m : fit.log_mls) {
    j["log_ml"].push_back({{"estimator", to_string(m.estimator)},
                           {"log_ml", m.failed ? json(nullptr) : number_or_null(m.log_value)},
                           {"status", m.failed ? "failed" : "ok"},
                           {"n_samples", m.n_samples},
                           {"message", m.message},
                           {"max_weight_fraction", number_or_null(m.max_weight_fraction)},
                           {"unstable", m.unstable},
                           {"condition_number", number_or_null(m.condition_number)}});
  }
  j["diagnostics_pass"] = fit.diagnostics_pass;
  j["warnings"] = fit.warnings;
  os << j.dump(2) << '\n';
}

void write_histogram_csv(std::ostream& os, const FitResult& fit, std::size_t bins) {
  if (bins == 0) throw UsageError("histogram needs at least one bin");
  const auto names = param_names(fit.config.model);
  os << "parameter,bin,lower,upper,count\n";
  for (std::size_t k = 0; k < kParamDim; ++k) {
    const std::vector<double> col = fit.pooled.column(k);
    const auto [lo_it, hi_it] = std::minmax_element(col.begin(), col.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double width = (hi - lo) / static_cast<double>(bins);
    std::vector<std::size_t> counts(bins, 0);
    for (double v : col) {
      std::size_t b = width > 0.0 ? static_cast<std::size_t>((v - lo) / width) : 0;
      counts[std::min(b, bins - 1)]++;
    }
    for (std::size_t b = 0; b < bins; ++b) {
      const double lower = lo + width * static_cast<double>(b);
      const double upper = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
      os << names[k] << ',' << b << ',' << csv::exact(lower) << ',' << csv::exact(upper) << ','
         << counts[b] << '\n';
    }
  }
}

std::vector<std::filesystem::path> write_fit_files(const std::filesystem::path& dir,
                                                   const FitResult& fit, const Dataset& data) {
  std::filesystem::create_directories(dir);
  const std::vector<std::filesystem::path> out = {dir / "draws.csv", dir / "summary.json",
                                                  dir / "histogram.csv"};
  {
    // Same header for both models; summary.json names the parameter.
    auto os = open_out(out[0]);
    write_draws_csv(os, fit.chains, {"theta1", "theta2", "theta3", "theta4", "dist_param"});
  }
  {
    auto os = open_out(out[1]);
    write_summary_json(os, fit, data);
  }
  {
    auto os = open_out(out[2]);
    write_histogram_csv(os, fit);
  }
  return out;
}

SelectionReport compare_models(const std::vector<RunConfig>& configs, const Dataset& data,
                               std::vector<FitResult>* fits) {
  if (configs.size() < 2) throw UsageError("compare needs at least 2 model configurations");
  for (const RunConfig& c : configs) {
    if (c.estimators != configs.front().estimators) {
      throw UsageError("compare: every configuration must request the same estimators");
    }
  }
  std::vector<ModelEvidence> evidence;
  std::vector<FitResult> local;
  for (const RunConfig& c : configs) {
    local.push_back(fit_model(c, data));
    evidence.push_back(to_evidence(local.back()));
  }
  SelectionReport rep = selection_report(std::move(evidence), configs.front().estimators);
  std::string transforms;
  for (const RunConfig& c : configs) {
    const std::string t(to_string(c.v_transform));
    if (transforms.find(t) == std::string::npos) transforms += (transforms.empty() ? "" : ",") + t;
  }
  rep.metadata["v_transform"] = transforms;
  rep.metadata["source"] = "mcmc";
  rep.metadata["time_unit"] = data.time_unit;
  if (fits) *fits = std::move(local);
  return rep;
}

SelectionReport compare_from_log_ml(const LogMlTable& table) {
  SelectionReport rep = selection_report(table.models, table.estimators);
  rep.metadata["source"] = "supplied log marginal likelihoods";
  return rep;
}

}  // namespace altbayes
