#include "altbayes/lifetime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <utility>

#include "altbayes/numerics.hpp"

namespace altbayes {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.69314718055994530942;

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (a == -kInf) return a;
  return a + std::log1p(std::exp(b - a));
}

// Weibull log-density with the scale given on the log axis.
double weibull_log_pdf_ls(double x, double log_alpha, double beta) {
  if (!(x > 0.0)) return -kInf;
  const double log_x = std::log(x);
  return log_alpha + std::log(beta) + (beta - 1.0) * log_x - std::exp(log_alpha + beta * log_x);
}

double weibull_log_rel_ls(double tau, double log_alpha, double beta) {
  if (tau <= 0.0) return 0.0;
  return -std::exp(log_alpha + beta * std::log(tau));
}

// Birnbaum-Saunders log-density with the scale given on the log axis.
double bs_log_pdf_ls(double x, double alpha, double log_beta) {
  if (!(x > 0.0)) return -kInf;
  const double log_x = std::log(x);
  const double ratio = std::exp(log_x - log_beta);  // x / beta
  const double inv_ratio = std::exp(log_beta - log_x);
  return log_add(log_x, log_beta) - kLn2 - kLnSqrtTwoPi - std::log(alpha) - 0.5 * log_beta -
         1.5 * log_x - (ratio + inv_ratio - 2.0) / (2.0 * alpha * alpha);
}

double bs_log_rel_ls(double tau, double alpha, double log_beta) {
  if (!(tau > 0.0)) return -kInf;
  // sqrt(tau/beta) - sqrt(beta/tau) = 2 sinh((ln tau - ln beta) / 2)
  const double z = 2.0 * std::sinh(0.5 * (std::log(tau) - log_beta)) / alpha;
  return log_std_normal_sf(z);
}

std::string theta_string(std::span<const double, 4> theta) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << theta[0] << ", " << theta[1] << ", " << theta[2] << ", " << theta[3] << ")";
  return os.str();
}

}  // namespace

std::string_view to_string(Model m) { return m == Model::gew ? "gew" : "gebs"; }

std::string_view to_string(CensoringKind k) {
  switch (k) {
    case CensoringKind::complete: return "complete";
    case CensoringKind::type1: return "type1";
    case CensoringKind::type2: return "type2";
  }
  return "?";
}

std::string_view to_string(VTransform t) {
  switch (t) {
    case VTransform::log: return "log";
    case VTransform::identity: return "identity";
    case VTransform::reciprocal: return "reciprocal";
  }
  return "?";
}

Model parse_model(std::string_view s) {
  if (s == "gew" || s == "GEW") return Model::gew;
  if (s == "gebs" || s == "GEBS") return Model::gebs;
  throw UsageError("unknown model '" + std::string(s) + "' (expected gew or gebs)");
}

VTransform parse_v_transform(std::string_view s) {
  if (s == "log") return VTransform::log;
  if (s == "identity") return VTransform::identity;
  if (s == "reciprocal") return VTransform::reciprocal;
  throw UsageError("unknown v_transform '" + std::string(s) +
                   "' (expected log, identity or reciprocal)");
}

double apply_v_transform(VTransform t, double stress) {
  switch (t) {
    case VTransform::log: return std::log(stress);
    case VTransform::identity: return stress;
    case VTransform::reciprocal: return 1.0 / stress;
  }
  return stress;
}

StressCell make_cell(double temperature, double stress, std::vector<double> failures,
                     std::size_t n_items, CensoringRule censoring, VTransform transform) {
  StressCell cell;
  cell.temperature = temperature;
  cell.nonthermal = stress;
  cell.v_value = apply_v_transform(transform, stress);
  std::sort(failures.begin(), failures.end());
  cell.failures = std::move(failures);
  cell.n_items = n_items;
  cell.censoring = censoring;
  if (censoring.kind == CensoringKind::type2 && !cell.failures.empty()) {
    cell.censoring.tau = cell.failures.back();
  }
  return cell;
}

std::size_t Dataset::total_items() const {
  std::size_t n = 0;
  for (const auto& c : cells) n += c.n_items;
  return n;
}

std::size_t Dataset::total_failures() const {
  std::size_t n = 0;
  for (const auto& c : cells) n += c.n_failures();
  return n;
}

void validate(const Dataset& data) {
  if (data.cells.empty()) throw UsageError("dataset has no stress cells");
  std::set<std::pair<double, double>> seen;
  for (std::size_t i = 0; i < data.cells.size(); ++i) {
    const auto& c = data.cells[i];
    const std::string where = "cell " + std::to_string(i + 1) + ": ";
    if (!(c.temperature > 0.0)) throw UsageError(where + "temperature must be > 0");
    if (!(c.nonthermal > 0.0)) throw UsageError(where + "non-thermal stress must be > 0");
    if (!std::isfinite(c.v_value)) throw UsageError(where + "V value is not finite");
    if (!seen.emplace(c.temperature, c.nonthermal).second) {
      throw UsageError(where + "duplicate (temperature, stress) pair");
    }
    if (c.n_failures() > c.n_items) throw UsageError(where + "more failures than items");
    if (!std::is_sorted(c.failures.begin(), c.failures.end())) {
      throw UsageError(where + "failure times not ascending");
    }
    for (double x : c.failures) {
      if (!(x > 0.0) || !std::isfinite(x)) throw UsageError(where + "failure times must be > 0");
    }
    switch (c.censoring.kind) {
      case CensoringKind::complete:
        if (c.n_failures() != c.n_items) {
          throw UsageError(where + "complete cell must have every item failed");
        }
        break;
      case CensoringKind::type1:
        if (!(c.censoring.tau > 0.0)) throw UsageError(where + "type-I tau must be > 0");
        if (!c.failures.empty() && c.failures.back() > c.censoring.tau) {
          throw UsageError(where + "failure after type-I censoring time");
        }
        break;
      case CensoringKind::type2:
        if (c.failures.empty()) throw UsageError(where + "type-II cell needs r >= 1 failures");
        if (c.censoring.tau != c.failures.back()) {
          throw UsageError(where + "type-II tau must equal the r-th failure time");
        }
        break;
    }
  }
  if (data.total_items() == 0) throw UsageError("dataset has no observations");
}

Dataset with_v_transform(Dataset data, VTransform transform) {
  data.v_transform = transform;
  for (auto& c : data.cells) c.v_value = apply_v_transform(transform, c.nonthermal);
  return data;
}

Dataset reliasoft_table_data(VTransform transform) {
  Dataset d;
  d.time_unit = "hours";
  d.v_transform = transform;
  d.use_conditions = UseConditions{313.0, 0.5};
  d.cells.push_back(make_cell(333.0, 0.9, {521, 561, 575, 599, 609, 684, 709, 713}, 8, {},
                              transform));
  d.cells.push_back(make_cell(353.0, 0.8, {345, 357, 439, 504}, 4, {}, transform));
  d.cells.push_back(
      make_cell(353.0, 0.9, {115, 119, 150, 152, 153, 155, 156, 164, 199}, 9, {}, transform));
  return d;
}

std::array<double, kParamDim> ParamVector::values() const {
  return {theta[0], theta[1], theta[2], theta[3], dist_param};
}

ParamVector ParamVector::from_values(Model model, std::span<const double> values) {
  if (values.size() != kParamDim) {
    throw UsageError("ParamVector needs exactly 5 values");
  }
  ParamVector p;
  p.model = model;
  for (std::size_t k = 0; k < 4; ++k) p.theta[k] = values[k];
  p.dist_param = values[4];
  return p;
}

std::array<std::string, kParamDim> param_names(Model model) {
  return {"theta1", "theta2", "theta3", "theta4", model == Model::gew ? "beta" : "alpha"};
}

PriorSpec PriorSpec::uniform(double shape, double rate) {
  PriorSpec p;
  p.params.fill(GammaPrior{shape, rate});
  return p;
}

std::array<double, kParamDim> PriorSpec::means() const {
  std::array<double, kParamDim> m{};
  for (std::size_t k = 0; k < kParamDim; ++k) m[k] = params[k].shape / params[k].rate;
  return m;
}

void validate(const PriorSpec& prior) {
  for (const auto& g : prior.params) {
    if (!(g.shape > 0.0) || !(g.rate > 0.0) || !std::isfinite(g.shape) ||
        !std::isfinite(g.rate)) {
      throw UsageError("gamma prior shape and rate must be positive and finite");
    }
  }
}

double eyring_exponent(std::span<const double, 4> theta, const StressCell& cell) {
  const double inv_t = 1.0 / cell.temperature;
  return theta[0] + theta[1] * inv_t + theta[2] * cell.v_value +
         theta[3] * cell.v_value * inv_t;
}

double eyring_link_gebs(std::span<const double, 4> theta, const StressCell& cell) {
  const double v = std::exp(eyring_exponent(theta, cell)) / cell.temperature;
  if (!std::isfinite(v) || v == 0.0) {
    throw NumericError("GEBS Eyring link out of range at theta = " + theta_string(theta));
  }
  return v;
}

double eyring_link_gew(std::span<const double, 4> theta, const StressCell& cell) {
  const double v = cell.temperature / std::exp(eyring_exponent(theta, cell));
  if (!std::isfinite(v) || v == 0.0) {
    throw NumericError("GEW Eyring link out of range at theta = " + theta_string(theta));
  }
  return v;
}

double weibull_log_pdf(double x, double alpha, double beta) {
  return weibull_log_pdf_ls(x, std::log(alpha), beta);
}

double weibull_log_reliability(double tau, double alpha, double beta) {
  return weibull_log_rel_ls(tau, std::log(alpha), beta);
}

double bs_log_pdf(double x, double alpha, double beta) {
  return bs_log_pdf_ls(x, alpha, std::log(beta));
}

double bs_log_reliability(double tau, double alpha, double beta) {
  return bs_log_rel_ls(tau, alpha, std::log(beta));
}

double log_likelihood(const ParamVector& params, const Dataset& data) {
  const std::span<const double, 4> theta(params.theta);
  const double shape = params.dist_param;
  if (!(shape > 0.0)) return -kInf;
  double total = 0.0;
  for (const auto& cell : data.cells) {
    const double eta = eyring_exponent(theta, cell);
    const double log_t = std::log(cell.temperature);
    const double n_cens = static_cast<double>(cell.n_censored());
    if (params.model == Model::gew) {
      const double log_alpha = log_t - eta;
      for (double x : cell.failures) total += weibull_log_pdf_ls(x, log_alpha, shape);
      if (n_cens > 0.0) total += n_cens * weibull_log_rel_ls(cell.censoring.tau, log_alpha, shape);
    } else {
      const double log_beta = eta - log_t;
      for (double x : cell.failures) total += bs_log_pdf_ls(x, shape, log_beta);
      if (n_cens > 0.0) total += n_cens * bs_log_rel_ls(cell.censoring.tau, shape, log_beta);
    }
  }
  return std::isnan(total) ? -kInf : total;
}

double log_prior(const ParamVector& params, const PriorSpec& prior) {
  const auto v = params.values();
  double total = 0.0;
  for (std::size_t k = 0; k < kParamDim; ++k) {
    if (!(v[k] > 0.0)) return -kInf;
    total += gamma_log_pdf(v[k], prior.params[k].shape, prior.params[k].rate);
  }
  return total;
}

double log_posterior_unnorm(const ParamVector& params, const Dataset& data,
                            const PriorSpec& prior) {
  const double lp = log_prior(params, prior);
  if (lp == -kInf) return lp;
  return log_likelihood(params, data) + lp;
}

std::vector<ParamVector> sample_prior(Model model, const PriorSpec& prior, std::size_t n,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::array<std::gamma_distribution<double>, kParamDim> dists;
  for (std::size_t k = 0; k < kParamDim; ++k) {
    dists[k] = std::gamma_distribution<double>(prior.params[k].shape, 1.0 / prior.params[k].rate);
  }
  std::vector<ParamVector> out;
  out.reserve(n);
  std::array<double, kParamDim> v{};
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t k = 0; k < kParamDim; ++k) v[k] = dists[k](rng);
    out.push_back(ParamVector::from_values(model, v));
  }
  return out;
}

}  // namespace altbayes
