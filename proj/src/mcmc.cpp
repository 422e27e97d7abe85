#include "altbayes/mcmc.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>

#include "altbayes/numerics.hpp"

namespace altbayes {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBlockTargetAccept = 0.234;
constexpr double kInitialLogScale = -1.0;  // step sd e^-1 on ln(param)
constexpr double kChainJitterSd = 0.1;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct State {
  std::vector<double> log_x;
  std::vector<double> x;
  double log_lik = -kInf;
  double log_prior = -kInf;
  double log_post() const { return log_lik + log_prior; }
};

bool evaluate(const SamplingTarget& target, State& s) {
  s.log_prior = target.log_prior(s.x);
  if (!std::isfinite(s.log_prior)) {
    s.log_lik = -kInf;
    return false;
  }
  s.log_lik = target.log_likelihood(s.x);
  return std::isfinite(s.log_lik);
}

bool make_state(const SamplingTarget& target, std::span<const double> x, State& s) {
  s.x.assign(x.begin(), x.end());
  s.log_x.resize(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !std::isfinite(x[k])) return false;
    s.log_x[k] = std::log(x[k]);
  }
  return evaluate(target, s);
}

// Points exp(s * ln(prior mean)) for s = 1, 0.9, ..., 0.
std::vector<std::vector<double>> shrink_ladder(const SamplingTarget& target) {
  std::vector<std::vector<double>> out;
  for (int step = 10; step >= 0; --step) {
    const double shrink = step / 10.0;
    std::vector<double> x(target.dim);
    for (std::size_t k = 0; k < target.dim; ++k) {
      x[k] = std::exp(shrink * std::log(target.prior_mean[k]));
    }
    out.push_back(std::move(x));
  }
  return out;
}

// Minimizes f with the Nelder-Mead simplex (reflection 1, expansion 2,
// contraction 1/2, shrink 1/2).
std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                std::vector<double> start, double step, int max_evals) {
  const std::size_t n = start.size();
  std::vector<std::vector<double>> simplex(n + 1, start);
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step;
  int evals = 0;
  for (std::size_t i = 0; i <= n; ++i, ++evals) fv[i] = f(simplex[i]);
  std::vector<std::size_t> order(n + 1);
  auto point = [&](const std::vector<double>& centroid, const std::vector<double>& worst,
                   double coef) {
    std::vector<double> p(n);
    for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + coef * (worst[k] - centroid[k]);
    return p;
  };
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    if (std::abs(fv[worst] - fv[best]) < 1e-10 * (1.0 + std::abs(fv[best]))) break;
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);
    }
    auto reflected = point(centroid, simplex[worst], -1.0);
    const double fr = f(reflected);
    ++evals;
    if (fr < fv[best]) {
      auto expanded = point(centroid, simplex[worst], -2.0);
      const double fe = f(expanded);
      ++evals;
      if (fe < fr) {
        simplex[worst] = std::move(expanded);
        fv[worst] = fe;
      } else {
        simplex[worst] = std::move(reflected);
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      simplex[worst] = std::move(reflected);
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      auto contracted = point(centroid, outside ? reflected : simplex[worst], 0.5);
      const double fc = f(contracted);
      ++evals;
      if (fc < std::min(fr, fv[worst])) {
        simplex[worst] = std::move(contracted);
        fv[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t k = 0; k < n; ++k) {
            simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
          }
          fv[i] = f(simplex[i]);
          ++evals;
        }
      }
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  return simplex[best];
}

State initial_state(const SamplingTarget& target, const SamplerConfig& config,
                    std::mt19937_64& rng) {
  State s;
  const std::size_t d = target.dim;
  switch (config.init) {
    case InitMode::explicit_point:
      if (config.init_point.size() != d) {
        throw InitializationError("explicit init point has wrong dimension");
      }
      if (make_state(target, config.init_point, s)) return s;
      throw InitializationError("target is not finite at the explicit init point");
    case InitMode::prior_draw: {
      if (!target.draw_prior) throw InitializationError("target has no prior sampler");
      std::vector<double> x(d);
      for (int attempt = 0; attempt < 100; ++attempt) {
        target.draw_prior(rng, x);
        if (make_state(target, x, s)) return s;
      }
      throw InitializationError("no finite starting point in 100 prior draws");
    }
    case InitMode::prior_mean: {
      if (target.prior_mean.size() != d) throw InitializationError("target has no prior mean");
      // Flat priors put the mean far outside the region where the likelihood
      // is representable; walk ln(mean) toward the origin until it is finite.
      for (const auto& x : shrink_ladder(target)) {
        if (make_state(target, x, s)) return s;
      }
      throw InitializationError("target not finite at the prior mean or any shrunk point");
    }
    case InitMode::posterior_mode: {
      const std::vector<double> mode =
          config.init_point.size() == d ? config.init_point : find_posterior_mode(target);
      if (make_state(target, mode, s)) return s;
      throw InitializationError("target is not finite at the located posterior mode");
    }
  }
  throw InitializationError("unknown init mode");
}

// Gaussian random-walk proposal with a covariance learned from past states,
// on either the ln(param) axis or the original axis.
struct JointProposal {
  bool log_axis = true;
  double log_scale = 0.0;
  Eigen::MatrixXd chol;
  Eigen::VectorXd mean;
  Eigen::MatrixXd m2;
  std::size_t n_obs = 0;
  std::size_t accepted = 0;
  std::size_t proposed = 0;

  void observe(const State& s) {
    const std::size_t d = s.x.size();
    if (mean.size() == 0) {
      mean = Eigen::VectorXd::Zero(static_cast<long>(d));
      m2 = Eigen::MatrixXd::Zero(static_cast<long>(d), static_cast<long>(d));
    }
    Eigen::VectorXd v(d);
    for (std::size_t k = 0; k < d; ++k) v[k] = log_axis ? s.log_x[k] : s.x[k];
    ++n_obs;
    const Eigen::VectorXd delta = v - mean;
    mean += delta / static_cast<double>(n_obs);
    m2 += delta * (v - mean).transpose();
  }

  // Falls back to `fallback_sd` on the diagonal until enough states are seen.
  void refresh(const std::vector<double>& fallback_sd) {
    const auto d = static_cast<long>(fallback_sd.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    if (n_obs > fallback_sd.size() + 1) {
      cov = m2 / static_cast<double>(n_obs - 1);
    } else {
      for (long k = 0; k < d; ++k) cov(k, k) = fallback_sd[k] * fallback_sd[k];
    }
    const double floor = 1e-10 * std::max(1.0, cov.diagonal().cwiseAbs().maxCoeff());
    double jitter = floor;
    for (int attempt = 0; attempt < 20; ++attempt) {
      Eigen::LLT<Eigen::MatrixXd> llt(cov + jitter * Eigen::MatrixXd::Identity(d, d));
      if (llt.info() == Eigen::Success) {
        chol = llt.matrixL();
        return;
      }
      jitter *= 10.0;
    }
    chol = Eigen::MatrixXd::Identity(d, d) * 0.1;
  }
};

class Metropolis {
 public:
  Metropolis(const SamplingTarget& target, const SamplerConfig& config, std::mt19937_64& rng)
      : target_(target),
        config_(config),
        rng_(rng),
        d_(target.dim),
        log_scale_(d_, kInitialLogScale),
        accepted_(d_, 0),
        proposed_(d_, 0) {
    log_joint_.log_axis = true;
    linear_joint_.log_axis = false;
  }

  void componentwise_sweep(State& s) {
    for (std::size_t k = 0; k < d_; ++k) {
      State y = s;
      y.log_x[k] = s.log_x[k] + std::exp(log_scale_[k]) * normal_(rng_);
      y.x[k] = std::exp(y.log_x[k]);
      ++proposed_[k];
      if (try_accept(s, y, y.log_x[k] - s.log_x[k])) ++accepted_[k];
    }
  }

  // One joint move on the ln axis followed by one on the original axis.
  // The ln-axis move handles skew and scale; the linear move follows the
  // straight ridges that Eyring links produce between theta1 and theta2.
  void block_step(State& s) {
    joint_move(s, log_joint_);
    joint_move(s, linear_joint_);
  }

  // Robbins-Monro update of the step sizes from the acceptance rates of
  // the window just finished.
  void adapt(std::size_t window_index) {
    const double gain = std::min(1.0, 1.0 / std::sqrt(static_cast<double>(window_index)));
    for (std::size_t k = 0; k < d_; ++k) {
      if (proposed_[k] == 0) continue;
      const double rate = static_cast<double>(accepted_[k]) / proposed_[k];
      log_scale_[k] += gain * (rate - config_.target_accept);
    }
    for (JointProposal* p : {&log_joint_, &linear_joint_}) {
      if (p->proposed == 0) continue;
      const double rate = static_cast<double>(p->accepted) / p->proposed;
      p->log_scale += gain * (rate - kBlockTargetAccept);
    }
    reset_counters();
  }

  void reset_counters() {
    std::fill(accepted_.begin(), accepted_.end(), 0);
    std::fill(proposed_.begin(), proposed_.end(), 0);
    for (JointProposal* p : {&log_joint_, &linear_joint_}) p->accepted = p->proposed = 0;
  }

  void observe(const State& s) {
    log_joint_.observe(s);
    linear_joint_.observe(s);
  }

  void refresh_block_covariance(const State& s) {
    std::vector<double> log_sd(d_), linear_sd(d_);
    for (std::size_t k = 0; k < d_; ++k) {
      log_sd[k] = std::exp(log_scale_[k]);
      linear_sd[k] = log_sd[k] * s.x[k];
    }
    log_joint_.refresh(log_sd);
    linear_joint_.refresh(linear_sd);
  }

  void start_block_phase(const State& s) {
    refresh_block_covariance(s);
    const double scale = std::log(2.38 / std::sqrt(static_cast<double>(d_)));
    log_joint_.log_scale = linear_joint_.log_scale = scale;
  }

  std::size_t accepted_total() const { return total_accepted_; }
  std::size_t proposed_total() const { return total_proposed_; }
  void reset_totals() { total_accepted_ = total_proposed_ = 0; }

  // Step sd per coordinate on the ln axis (componentwise) or of the
  // ln-axis joint proposal (block).
  std::vector<double> final_scales(bool block) const {
    std::vector<double> out(d_);
    for (std::size_t k = 0; k < d_; ++k) {
      out[k] = block ? std::exp(log_joint_.log_scale) *
                           std::sqrt((log_joint_.chol * log_joint_.chol.transpose())(
                               static_cast<long>(k), static_cast<long>(k)))
                     : std::exp(log_scale_[k]);
    }
    return out;
  }

 private:
  void joint_move(State& s, JointProposal& p) {
    State y = s;
    Eigen::VectorXd z(d_);
    for (std::size_t k = 0; k < d_; ++k) z[static_cast<long>(k)] = normal_(rng_);
    const Eigen::VectorXd step = std::exp(p.log_scale) * (p.chol * z);
    double jac = 0.0;
    for (std::size_t k = 0; k < d_; ++k) {
      if (p.log_axis) {
        y.log_x[k] = s.log_x[k] + step[static_cast<long>(k)];
        y.x[k] = std::exp(y.log_x[k]);
        jac += step[static_cast<long>(k)];
      } else {
        y.x[k] = s.x[k] + step[static_cast<long>(k)];
        if (!(y.x[k] > 0.0)) {
          ++p.proposed;
          ++total_proposed_;
          return;  // outside the support
        }
        y.log_x[k] = std::log(y.x[k]);
      }
    }
    ++p.proposed;
    if (try_accept(s, y, jac)) ++p.accepted;
  }

  bool try_accept(State& s, State& y, double log_jacobian) {
    ++total_proposed_;
    for (std::size_t k = 0; k < d_; ++k) {
      if (!(y.x[k] > 0.0) || !std::isfinite(y.x[k])) return false;
    }
    if (!evaluate(target_, y)) return false;
    const double log_ratio = y.log_post() - s.log_post() + config_.jacobian_sign * log_jacobian;
    if (!(log_ratio >= 0.0) && !(std::log(uniform_(rng_)) < log_ratio)) return false;
    s = std::move(y);
    ++total_accepted_;
    return true;
  }

  const SamplingTarget& target_;
  const SamplerConfig& config_;
  std::mt19937_64& rng_;
  std::size_t d_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::vector<double> log_scale_;
  std::vector<std::size_t> accepted_;
  std::vector<std::size_t> proposed_;
  JointProposal log_joint_;
  JointProposal linear_joint_;
  std::size_t total_accepted_ = 0;
  std::size_t total_proposed_ = 0;
};

}  // namespace

std::string_view to_string(InitMode m) {
  switch (m) {
    case InitMode::prior_mean: return "prior-mean";
    case InitMode::prior_draw: return "prior-draw";
    case InitMode::explicit_point: return "explicit";
    case InitMode::posterior_mode: return "mode";
  }
  return "?";
}

std::string_view to_string(ProposalKind p) {
  return p == ProposalKind::componentwise ? "componentwise" : "block";
}

InitMode parse_init_mode(std::string_view s) {
  if (s == "prior-mean") return InitMode::prior_mean;
  if (s == "prior-draw") return InitMode::prior_draw;
  if (s == "explicit") return InitMode::explicit_point;
  if (s == "mode") return InitMode::posterior_mode;
  throw UsageError("unknown init mode '" + std::string(s) + "'");
}

ProposalKind parse_proposal_kind(std::string_view s) {
  if (s == "componentwise") return ProposalKind::componentwise;
  if (s == "block") return ProposalKind::block;
  throw UsageError("unknown proposal kind '" + std::string(s) + "'");
}

void validate(const SamplerConfig& c) {
  if (c.n_chains < 1) throw UsageError("n_chains must be >= 1");
  if (c.n_keep < 1) throw UsageError("n_keep must be >= 1");
  if (c.thin < 1) throw UsageError("thin must be >= 1");
  if (c.adapt_window < 1) throw UsageError("adapt_window must be >= 1");
  if (!(c.target_accept > 0.0 && c.target_accept < 1.0)) {
    throw UsageError("target_accept must lie in (0, 1)");
  }
}

SamplingTarget make_alt_target(const Dataset& data, const PriorSpec& prior, Model model) {
  validate(data);
  validate(prior);
  auto shared_data = std::make_shared<const Dataset>(data);
  SamplingTarget t;
  t.dim = kParamDim;
  t.log_likelihood = [shared_data, model](std::span<const double> v) {
    return log_likelihood(ParamVector::from_values(model, v), *shared_data);
  };
  t.log_prior = [prior, model](std::span<const double> v) {
    return log_prior(ParamVector::from_values(model, v), prior);
  };
  const auto m = prior.means();
  t.prior_mean.assign(m.begin(), m.end());
  t.draw_prior = [prior](std::mt19937_64& rng, std::span<double> out) {
    for (std::size_t k = 0; k < kParamDim; ++k) {
      std::gamma_distribution<double> g(prior.params[k].shape, 1.0 / prior.params[k].rate);
      out[k] = g(rng);
    }
  };
  return t;
}

std::vector<double> PosteriorDraws::column(std::size_t k) const {
  std::vector<double> out(size());
  for (std::size_t t = 0; t < size(); ++t) out[t] = values[t * dim + k];
  return out;
}

std::vector<double> find_posterior_mode(const SamplingTarget& target) {
  if (target.prior_mean.size() != target.dim) {
    throw InitializationError("target has no prior mean");
  }
  const auto neg_log_post = [&target](const std::vector<double>& u) {
    State s;
    s.x.resize(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) s.x[k] = std::exp(u[k]);
    s.log_x = u;
    for (double v : s.x) {
      if (!(v > 0.0) || !std::isfinite(v)) return kInf;
    }
    return evaluate(target, s) ? -s.log_post() : kInf;
  };
  std::vector<double> best_u;
  double best_f = kInf;
  for (const auto& x : shrink_ladder(target)) {
    std::vector<double> u(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) u[k] = std::log(x[k]);
    if (!std::isfinite(neg_log_post(u))) continue;
    // Restart from the first optimum to escape simplex collapse.
    u = nelder_mead(neg_log_post, std::move(u), 0.5, 4000);
    u = nelder_mead(neg_log_post, std::move(u), 0.1, 4000);
    const double fu = neg_log_post(u);
    if (fu < best_f) {
      best_f = fu;
      best_u = std::move(u);
    }
  }
  if (best_u.empty()) {
    throw InitializationError("target not finite at the prior mean or any shrunk point");
  }
  std::vector<double> x(best_u.size());
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::exp(best_u[k]);
  return x;
}

std::uint64_t chain_seed(std::uint64_t seed, std::size_t chain_id) {
  return splitmix64(splitmix64(seed) ^ (0xD1B54A32D192ED03ULL * (chain_id + 1)));
}

PosteriorDraws run_chain(const SamplingTarget& target, const SamplerConfig& config,
                         std::size_t chain_id) {
  validate(config);
  if (target.dim == 0) throw UsageError("target dimension must be >= 1");
  const std::uint64_t seed = chain_seed(config.seed, chain_id);
  std::mt19937_64 rng(seed);

  State state = initial_state(target, config, rng);
  if (config.n_chains > 1) {
    std::normal_distribution<double> jitter(0.0, kChainJitterSd);
    State moved = state;
    for (std::size_t k = 0; k < target.dim; ++k) {
      moved.log_x[k] += jitter(rng);
      moved.x[k] = std::exp(moved.log_x[k]);
    }
    if (evaluate(target, moved)) state = std::move(moved);
  }

  Metropolis mh(target, config, rng);
  const bool block = config.proposal == ProposalKind::block;
  // Block mode: first half of burn-in tunes coordinate steps and reaches the
  // bulk, the second half runs joint proposals with a learned covariance.
  const std::size_t block_start = block ? config.burn_in / 5 : config.burn_in;
  const std::size_t cov_start = block_start / 2;
  std::size_t window = 0;
  for (std::size_t it = 0; it < config.burn_in; ++it) {
    if (block && it == block_start) {
      mh.start_block_phase(state);
      mh.reset_counters();
    }
    if (it < block_start) {
      mh.componentwise_sweep(state);
    } else {
      mh.block_step(state);
    }
    if (block && it >= cov_start) mh.observe(state);
    if ((it + 1) % config.adapt_window == 0) {
      mh.adapt(++window);
      if (block && it >= block_start && (window % 4 == 0)) mh.refresh_block_covariance(state);
    }
  }
  if (block && config.burn_in == 0) mh.start_block_phase(state);
  mh.reset_totals();

  PosteriorDraws out;
  out.dim = target.dim;
  out.seed = seed;
  out.chain_id = chain_id;
  out.config = config;
  out.values.reserve(config.n_keep * target.dim);
  out.log_liks.reserve(config.n_keep);
  out.log_priors.reserve(config.n_keep);
  const std::size_t total = config.n_keep * config.thin;
  for (std::size_t it = 0; it < total; ++it) {
    if (block) {
      mh.block_step(state);
    } else {
      mh.componentwise_sweep(state);
    }
    if ((it + 1) % config.thin == 0) {
      if (!std::isfinite(state.log_post())) {
        std::terminate();  // accepted states are finite by construction
      }
      out.values.insert(out.values.end(), state.x.begin(), state.x.end());
      out.log_liks.push_back(state.log_lik);
      out.log_priors.push_back(state.log_prior);
    }
  }
  out.acceptance_rate = mh.proposed_total() > 0
                            ? static_cast<double>(mh.accepted_total()) / mh.proposed_total()
                            : 0.0;
  out.final_scales = mh.final_scales(block);
  return out;
}

std::vector<PosteriorDraws> run_chains(const SamplingTarget& target,
                                       const SamplerConfig& config) {
  validate(config);
  SamplerConfig resolved = config;
  if (config.init == InitMode::posterior_mode && config.init_point.size() != target.dim) {
    resolved.init_point = find_posterior_mode(target);
  }
  const auto n = static_cast<long>(config.n_chains);
  std::vector<PosteriorDraws> chains(config.n_chains);
  std::vector<std::exception_ptr> errors(config.n_chains);
#pragma omp parallel for schedule(dynamic, 1)
  for (long c = 0; c < n; ++c) {
    try {
      chains[c] = run_chain(target, resolved, static_cast<std::size_t>(c));
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return chains;
}

PosteriorDraws pool_chains(const std::vector<PosteriorDraws>& chains) {
  if (chains.empty()) throw UsageError("pool_chains: no chains");
  PosteriorDraws out;
  out.dim = chains.front().dim;
  out.seed = chains.front().config.seed;
  out.config = chains.front().config;
  double acc = 0.0;
  for (const auto& c : chains) {
    out.values.insert(out.values.end(), c.values.begin(), c.values.end());
    out.log_liks.insert(out.log_liks.end(), c.log_liks.begin(), c.log_liks.end());
    out.log_priors.insert(out.log_priors.end(), c.log_priors.begin(), c.log_priors.end());
    acc += c.acceptance_rate;
  }
  out.acceptance_rate = acc / static_cast<double>(chains.size());
  return out;
}

void write_draws_csv(std::ostream& os, const std::vector<PosteriorDraws>& chains,
                     const std::vector<std::string>& param_names) {
  os << "chain,iteration";
  for (const auto& n : param_names) os << ',' << n;
  os << ",log_lik,log_prior\n";
  const auto old_precision = os.precision(17);
  for (const auto& c : chains) {
    for (std::size_t t = 0; t < c.size(); ++t) {
      os << c.chain_id << ',' << (t + 1) * c.config.thin;
      for (double v : c.draw(t)) os << ',' << v;
      os << ',' << c.log_liks[t] << ',' << c.log_priors[t] << '\n';
    }
  }
  os.precision(old_precision);
}

}  // namespace altbayes
