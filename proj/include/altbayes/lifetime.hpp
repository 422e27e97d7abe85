#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace altbayes {

enum class Model { gew, gebs };

enum class CensoringKind { complete, type1, type2 };

// Maps the non-thermal stressor S onto the V used by the Eyring link.
enum class VTransform { log, identity, reciprocal };

std::string_view to_string(Model m);
std::string_view to_string(CensoringKind k);
std::string_view to_string(VTransform t);
Model parse_model(std::string_view s);
VTransform parse_v_transform(std::string_view s);

double apply_v_transform(VTransform t, double stress);

struct CensoringRule {
  CensoringKind kind = CensoringKind::complete;
  double tau = 0.0;  // type1: fixed censoring time; type2: r-th failure time
};

/// One accelerated stress combination {T_i, S_i} and what was observed there.
struct StressCell {
  double temperature = 0.0;  // kelvin
  double nonthermal = 0.0;   // S_i
  double v_value = 0.0;      // V_i = transform(S_i)
  std::vector<double> failures;  // ascending
  std::size_t n_items = 0;
  CensoringRule censoring;

  std::size_t n_failures() const { return failures.size(); }
  std::size_t n_censored() const { return n_items - failures.size(); }
};

/// Builds a cell and derives V_i. Failures are sorted; for type-II
/// censoring tau is set to the last failure time.
StressCell make_cell(double temperature, double stress, std::vector<double> failures,
                     std::size_t n_items, CensoringRule censoring, VTransform transform);

struct UseConditions {
  double temperature = 0.0;
  double nonthermal = 0.0;
};

struct Dataset {
  std::vector<StressCell> cells;
  std::string time_unit = "unspecified";
  VTransform v_transform = VTransform::log;
  std::optional<UseConditions> use_conditions;

  std::size_t total_items() const;
  std::size_t total_failures() const;
};

// Throws UsageError naming the first violated invariant.
void validate(const Dataset& data);

// Returns a copy with every V_i recomputed under `transform`.
Dataset with_v_transform(Dataset data, VTransform transform);

// Failure-time data of the ReliaSoft temperature/humidity test
// (21 devices, three stress cells, all failed).
Dataset reliasoft_table_data(VTransform transform = VTransform::log);

inline constexpr std::size_t kParamDim = 5;

/// theta_1..theta_4 followed by the distribution parameter
/// (alpha, the BS shape, for GEBS; beta, the Weibull shape, for GEW).
struct ParamVector {
  Model model = Model::gew;
  std::array<double, 4> theta{};
  double dist_param = 0.0;

  std::array<double, kParamDim> values() const;
  static ParamVector from_values(Model model, std::span<const double> values);
};

std::array<std::string, kParamDim> param_names(Model model);

struct GammaPrior {
  double shape = 1.0;
  double rate = 1.0;
};

/// Independent gamma priors in ParamVector order.
struct PriorSpec {
  std::array<GammaPrior, kParamDim> params{};

  static PriorSpec uniform(double shape, double rate);
  std::array<double, kParamDim> means() const;
};
void validate(const PriorSpec& prior);

// --- Eyring links -------------------------------------------------------

// eta = theta1 + theta2/T + theta3 V + theta4 V/T
double eyring_exponent(std::span<const double, 4> theta, const StressCell& cell);

// beta_i = (1/T) exp(eta). Throws NumericError if the result overflows.
double eyring_link_gebs(std::span<const double, 4> theta, const StressCell& cell);

// alpha_i = T exp(-eta). Throws NumericError if the result overflows.
double eyring_link_gew(std::span<const double, 4> theta, const StressCell& cell);

// --- Lifetime distributions ---------------------------------------------

// Weibull with f(x) = a b x^(b-1) exp(-a x^b). x = 0 returns -inf.
double weibull_log_pdf(double x, double alpha, double beta);
double weibull_log_reliability(double tau, double alpha, double beta);

// Birnbaum-Saunders with shape alpha and scale (median) beta.
double bs_log_pdf(double x, double alpha, double beta);
double bs_log_reliability(double tau, double alpha, double beta);

// --- Likelihood, prior, posterior ---------------------------------------

// Sum over cells of per-failure log densities plus (n_i - r_i) log R(tau_i).
// Evaluated with log-scale links, so extreme parameters give -inf rather
// than an overflow error.
double log_likelihood(const ParamVector& params, const Dataset& data);

double log_prior(const ParamVector& params, const PriorSpec& prior);

double log_posterior_unnorm(const ParamVector& params, const Dataset& data,
                            const PriorSpec& prior);

std::vector<ParamVector> sample_prior(Model model, const PriorSpec& prior, std::size_t n,
                                      std::uint64_t seed);

}  // namespace altbayes
