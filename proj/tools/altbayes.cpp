// Command-line front end: fit, compare, validate.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "altbayes/dataset_io.hpp"
#include "altbayes/numerics.hpp"
#include "altbayes/oracles.hpp"
#include "altbayes/pipeline.hpp"
#include "altbayes/report.hpp"

namespace fs = std::filesystem;
using namespace altbayes;

namespace {

enum ExitCode { kOk = 0, kValidationFailed = 1, kUsage = 2, kFailure = 3 };

struct Flags {
  std::optional<std::string> model;
  std::vector<std::string> priors;
  std::string data;
  std::optional<std::size_t> chains, iters, burnin, thin;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> v_transform;
  std::optional<std::string> estimators;
  std::string from_logml;
  std::string out;
  bool quick = false;
};

// Quick mode for fit/compare: 4 short chains, enough for a smoke run.
constexpr std::size_t kQuickChains = 4;
constexpr std::size_t kQuickBurnIn = 2000;
constexpr std::size_t kQuickKeep = 5000;

void apply_overrides(RunConfig& c, const Flags& f) {
  if (f.model) c.model = parse_model(*f.model);
  if (f.quick) {
    c.sampler.n_chains = kQuickChains;
    c.sampler.burn_in = kQuickBurnIn;
    c.sampler.n_keep = kQuickKeep;
  }
  if (f.chains) c.sampler.n_chains = *f.chains;
  if (f.iters) c.sampler.n_keep = *f.iters;
  if (f.burnin) c.sampler.burn_in = *f.burnin;
  if (f.thin) c.sampler.thin = *f.thin;
  if (f.seed) c.sampler.seed = *f.seed;
  if (f.v_transform) c.v_transform = parse_v_transform(*f.v_transform);
  if (f.estimators) c.estimators = parse_estimator_list(*f.estimators);
  validate(c);
}

Dataset load_data(const Flags& f) {
  if (f.data.empty()) throw UsageError("--data <file> is required");
  return parse_dataset_csv(fs::path(f.data));
}

void print_fit(const FitResult& fit) {
  const auto names = param_names(fit.config.model);
  std::printf("%s (%s, v_transform=%s): %zu draws from %zu chain(s)\n", fit.config.label.c_str(),
              std::string(to_string(fit.config.model)).c_str(),
              std::string(to_string(fit.config.v_transform)).c_str(), fit.pooled.size(),
              fit.chains.size());
  std::printf("  %-8s %12s %12s %8s %8s\n", "param", "mean", "sd", "r_hat", "mcse/sd");
  for (std::size_t k = 0; k < kParamDim; ++k) {
    std::printf("  %-8s %12.5g %12.5g %8.4f %8.4f\n", names[k].c_str(), fit.summary.mean[k],
                fit.summary.sd[k], fit.diagnostics.r_hat[k], fit.diagnostics.mc_error_ratio[k]);
  }
  if (fit.dic) std::printf("  DIC %.4f (p_D %.4f)\n", fit.dic->dic, fit.dic->p_d);
  for (const LogMarginal& m : fit.log_mls) {
    if (m.failed) {
      std::printf("  %-20s failed: %s\n", std::string(to_string(m.estimator)).c_str(),
                  m.message.c_str());
    } else {
      std::printf("  %-20s %.6f\n", std::string(to_string(m.estimator)).c_str(), m.log_value);
    }
  }
  for (const std::string& w : fit.warnings) std::printf("  warning: %s\n", w.c_str());
}

int cmd_fit(const Flags& f) {
  const Dataset data = load_data(f);
  RunConfig config;
  if (f.priors.size() > 1) throw UsageError("fit takes at most one --priors file");
  if (!f.priors.empty()) {
    config = load_run_config(fs::path(f.priors.front()));
  } else if (f.model) {
    config = reference_config(parse_model(*f.model), 1);
  } else {
    throw UsageError("fit needs --model or --priors");
  }
  apply_overrides(config, f);
  const fs::path out = !f.out.empty() ? fs::path(f.out)
                       : !config.output_dir.empty() ? fs::path(config.output_dir)
                                                    : fs::path("altbayes_out");
  const FitResult fit = fit_model(config, data);
  print_fit(fit);
  for (const fs::path& p : write_fit_files(out, fit, data)) std::printf("wrote %s\n", p.c_str());
  return kOk;
}

int cmd_compare(const Flags& f) {
  const fs::path out = f.out.empty() ? fs::path("altbayes_out") : fs::path(f.out);
  SelectionReport rep;
  if (!f.from_logml.empty()) {
    rep = compare_from_log_ml(read_log_ml_csv(fs::path(f.from_logml)));
  } else {
    const Dataset data = load_data(f);
    std::vector<RunConfig> configs;
    if (f.priors.empty()) {
      configs = reference_configs();
    } else {
      for (const std::string& p : f.priors) configs.push_back(load_run_config(fs::path(p)));
    }
    for (RunConfig& c : configs) apply_overrides(c, f);
    std::vector<FitResult> fits;
    rep = compare_models(configs, data, &fits);
    for (const FitResult& fit : fits) {
      print_fit(fit);
      write_fit_files(out / fit.config.label, fit, data);
    }
  }
  for (const fs::path& p : write_report_files(out, rep)) std::printf("wrote %s\n", p.c_str());
  return kOk;
}

int cmd_validate(const Flags& f) {
  ValidationOptions options;
  if (f.seed) options.seed = *f.seed;
  if (f.quick) options.plan = ValidationPlan::quick();
  const auto rows = run_oracle_suite(options);
  bool all = true;
  for (const ValidationRow& r : rows) all &= r.pass;
  if (f.out.empty()) {
    write_validation_csv(std::cout, rows);
  } else {
    fs::create_directories(f.out);
    const fs::path p = fs::path(f.out) / "validation.csv";
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    write_validation_csv(os, rows);
    std::printf("wrote %s\n", p.c_str());
  }
  std::fprintf(stderr, "%s: %zu checks\n", all ? "PASS" : "FAIL", rows.size());
  return all ? kOk : kValidationFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian accelerated life testing: GEW/GEBS fitting and model selection"};
  app.require_subcommand(1);
  Flags f;

  const auto add_sampling = [&](CLI::App* sub) {
    sub->add_option("--data", f.data, "dataset CSV (temp_K,stress,time,status[,tau])");
    sub->add_option("--model", f.model, "gew or gebs");
    sub->add_option("--chains", f.chains, "number of chains");
    sub->add_option("--iters", f.iters, "kept draws per chain");
    sub->add_option("--burnin", f.burnin, "burn-in iterations per chain");
    sub->add_option("--thin", f.thin, "keep every thin-th state");
    sub->add_option("--seed", f.seed, "master seed");
    sub->add_option("--v-transform", f.v_transform, "log, identity or reciprocal");
    sub->add_option("--estimators", f.estimators,
                    "comma list of simple_mc,harmonic_mean,laplace_metropolis,ppd");
    sub->add_option("--out", f.out, "output directory");
    sub->add_flag("--quick", f.quick, "short run: 4 chains, burn-in 2000, 5000 draws");
  };

  CLI::App* fit = app.add_subcommand("fit", "sample one model and write draws, summary, histogram");
  add_sampling(fit);
  fit->add_option("--priors", f.priors, "run configuration JSON");

  CLI::App* compare = app.add_subcommand("compare", "fit several models and write the report");
  add_sampling(compare);
  compare->add_option("--priors", f.priors,
                      "run configuration JSON, repeat per model (default: the six reference settings)");
  compare->add_option("--from-logml", f.from_logml,
                      "CSV model,estimator,log_ml; skips sampling");

  CLI::App* validate = app.add_subcommand("validate", "run the oracle suite");
  validate->add_option("--seed", f.seed, "master seed");
  validate->add_option("--out", f.out, "directory for validation.csv (default: stdout)");
  validate->add_flag("--quick", f.quick, "N = 1e4 with widened tolerances");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit) return cmd_fit(f);
    if (*compare) return cmd_compare(f);
    return cmd_validate(f);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
}
