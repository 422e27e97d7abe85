#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "altbayes/lifetime.hpp"
#include "altbayes/mcmc.hpp"
#include "altbayes/selection.hpp"

namespace altbayes {

/// Everything needed to fit one model and estimate its evidence.
///
/// JSON keys (all optional except model; unknown keys are errors):
///   label, model, priors, v_transform, n_chains, burn_in, n_keep, thin,
///   seed, adapt_window, target_accept, init, init_point, proposal,
///   estimators, simple_mc_draws, output_dir
/// `priors` is either one {"shape", "rate"} object applied to all five
/// parameters or an array of five such objects in theta1..theta4,
/// dist_param order.
struct RunConfig {
  std::string label;
  Model model = Model::gew;
  PriorSpec prior = PriorSpec::uniform(1.0, 0.001);
  VTransform v_transform = VTransform::log;
  SamplerConfig sampler = default_sampler();
  std::vector<Estimator> estimators = {Estimator::laplace_metropolis, Estimator::harmonic_mean,
                                       Estimator::ppd};
  std::size_t simple_mc_draws = 1000000;
  std::string output_dir;

  // 1 chain, burn-in 50000, 200000 kept draws, block proposal started at the
  // posterior mode.
  static SamplerConfig default_sampler();
};

void validate(const RunConfig& config);

RunConfig parse_run_config(std::istream& is);
RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_to_json(const RunConfig& config, int indent = 2);

// The six prior settings of the reference application: GEW/GEBS with
// setting 1, 2 or 3 (labels GEW_BF1 ... GEBS_BF3).
RunConfig reference_config(Model model, int setting);
std::vector<RunConfig> reference_configs();

}  // namespace altbayes
