#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "altbayes/lifetime.hpp"

namespace altbayes {

class InitializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// prior_mean: the prior mean, pulled toward 1 on the log axis if the
// target is not finite there. posterior_mode: multi-start Nelder-Mead on
// ln(param) from those same points; chains then start at the best mode found.
enum class InitMode { prior_mean, prior_draw, explicit_point, posterior_mode };

// componentwise: one Gaussian random-walk coordinate at a time on ln(param),
// each coordinate's step size tuned toward target_accept.
// block: alternates a joint move on ln(param) with a joint move on the
// original scale. Each move learns its covariance from the burn-in draws and
// scales it toward a 0.234 acceptance rate.
enum class ProposalKind { componentwise, block };

std::string_view to_string(InitMode m);
std::string_view to_string(ProposalKind p);
InitMode parse_init_mode(std::string_view s);
ProposalKind parse_proposal_kind(std::string_view s);

struct SamplerConfig {
  std::size_t n_chains = 1;
  std::size_t burn_in = 50000;
  std::size_t n_keep = 200000;
  std::size_t thin = 1;
  std::uint64_t seed = 0;
  std::size_t adapt_window = 50;  // iterations per Robbins-Monro update
  double target_accept = 0.44;    // per-coordinate target (componentwise)
  InitMode init = InitMode::prior_mean;
  std::vector<double> init_point;  // InitMode::explicit_point
  ProposalKind proposal = ProposalKind::componentwise;
  // Multiplier on the ln-scale Jacobian term. Always +1 except in the
  // mutation tests that check the validation harness notices a wrong sign.
  double jacobian_sign = 1.0;
};

void validate(const SamplerConfig& config);

/// A density over a positive-orthant parameter vector, split into
/// likelihood and prior so that both can be stored per draw.
struct SamplingTarget {
  std::size_t dim = 0;
  std::function<double(std::span<const double>)> log_likelihood;
  std::function<double(std::span<const double>)> log_prior;
  std::vector<double> prior_mean;
  std::function<void(std::mt19937_64&, std::span<double>)> draw_prior;
};

SamplingTarget make_alt_target(const Dataset& data, const PriorSpec& prior, Model model);

struct PosteriorDraws {
  std::size_t dim = 0;
  std::vector<double> values;  // row-major, size() x dim, original scale
  std::vector<double> log_liks;
  std::vector<double> log_priors;
  double acceptance_rate = 0.0;  // post burn-in, over all proposals
  std::vector<double> final_scales;
  std::uint64_t seed = 0;
  std::size_t chain_id = 0;
  SamplerConfig config;

  std::size_t size() const { return log_liks.size(); }
  std::span<const double> draw(std::size_t t) const {
    return {values.data() + t * dim, dim};
  }
  std::vector<double> column(std::size_t k) const;
};

// Sub-seed for chain `chain_id` (splitmix64 of seed and chain index).
std::uint64_t chain_seed(std::uint64_t seed, std::size_t chain_id);

// Maximizes the target on ln(param) from each finite point of the prior-mean
// shrink ladder and returns the best point on the original scale.
std::vector<double> find_posterior_mode(const SamplingTarget& target);

// Throws InitializationError when no finite starting point is found.
PosteriorDraws run_chain(const SamplingTarget& target, const SamplerConfig& config,
                         std::size_t chain_id);

// Chains run in parallel (one OpenMP task per chain); output order is by
// chain id and does not depend on scheduling.
std::vector<PosteriorDraws> run_chains(const SamplingTarget& target, const SamplerConfig& config);

// Concatenates all chains into one draw set (chain order).
PosteriorDraws pool_chains(const std::vector<PosteriorDraws>& chains);

// Header: chain,iteration,theta1,...,<dist param>,log_lik,log_prior
void write_draws_csv(std::ostream& os, const std::vector<PosteriorDraws>& chains,
                     const std::vector<std::string>& param_names);

}  // namespace altbayes
