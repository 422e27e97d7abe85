#include "altbayes/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "altbayes/numerics.hpp"

namespace altbayes {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Sample covariance with n-1 denominator.
double covariance(std::span<const double> a, std::span<const double> b) {
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(a.size() - 1);
}

}  // namespace

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  const std::size_t m = chains.size();
  if (m < 2) throw UsageError("gelman_rubin: needs at least two chains");
  const std::size_t n = chains.front().size();
  for (const auto& c : chains) {
    if (c.size() != n) throw UsageError("gelman_rubin: chains must have equal length");
  }
  if (n < 10) throw UsageError("gelman_rubin: chains must have length >= 10");

  std::vector<double> xbar(m), s2(m), xbar_sq(m);
  for (std::size_t j = 0; j < m; ++j) {
    xbar[j] = mean_of(chains[j]);
    s2[j] = covariance(chains[j], chains[j]);
    xbar_sq[j] = xbar[j] * xbar[j];
  }
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  const double w = mean_of(s2);
  if (!(w > 0.0)) return kDegenerateRhat;
  const double b = nd * covariance(xbar, xbar);
  const double mu = mean_of(xbar);
  const double var_w = covariance(s2, s2) / md;
  const double var_b = 2.0 * b * b / (md - 1.0);
  const double cov_wb = (nd / md) * (covariance(s2, xbar_sq) - 2.0 * mu * covariance(s2, xbar));
  const double v = (nd - 1.0) * w / nd + (1.0 + 1.0 / md) * b / nd;
  const double var_v = ((nd - 1.0) * (nd - 1.0) * var_w +
                        (1.0 + 1.0 / md) * (1.0 + 1.0 / md) * var_b +
                        2.0 * (nd - 1.0) * (1.0 + 1.0 / md) * cov_wb) /
                       (nd * nd);
  const double df = var_v > 0.0 ? 2.0 * v * v / var_v : std::numeric_limits<double>::infinity();
  const double df_adj = std::isinf(df) ? 1.0 : (df + 3.0) / (df + 1.0);
  return std::sqrt(df_adj * v / w);
}

double split_gelman_rubin(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> halves;
  halves.reserve(2 * chains.size());
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    // Odd lengths drop the middle draw so both halves match.
    halves.emplace_back(c.begin(), c.begin() + static_cast<long>(half));
    halves.emplace_back(c.end() - static_cast<long>(half), c.end());
  }
  return gelman_rubin(halves);
}

double mc_error(std::span<const double> draws) {
  const std::size_t n = draws.size();
  if (n < 100) throw UsageError("mc_error: needs at least 100 draws");
  const auto n_batches = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  const std::size_t batch = n / n_batches;
  std::vector<double> means(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    means[b] = mean_of(draws.subspan(b * batch, batch));
  }
  const double var = covariance(means, means);
  return std::sqrt(std::max(0.0, var) / static_cast<double>(n_batches));
}

ChainDiagnostics diagnose(const std::vector<PosteriorDraws>& chains) {
  if (chains.empty()) throw UsageError("diagnose: no chains");
  const std::size_t dim = chains.front().dim;
  const std::size_t len = chains.front().size();
  for (const auto& c : chains) {
    if (c.dim != dim || c.size() != len) throw UsageError("diagnose: chains differ in shape");
  }
  ChainDiagnostics out;
  out.split_chain = chains.size() == 1;
  const PosteriorSummary pooled = summarize(pool_chains(chains));
  for (std::size_t k = 0; k < dim; ++k) {
    std::vector<std::vector<double>> cols;
    for (const auto& c : chains) cols.push_back(c.column(k));
    out.r_hat.push_back(len >= 20 ? split_gelman_rubin(cols) : kNaN);
    double err = kNaN;
    if (len >= 100) {
      // Pooled mean is the average of equal-length chain means.
      double sum_sq = 0.0;
      for (const auto& col : cols) {
        const double e = mc_error(col);
        sum_sq += e * e;
      }
      err = std::sqrt(sum_sq) / static_cast<double>(cols.size());
    }
    out.mc_error.push_back(err);
    out.posterior_sd.push_back(pooled.sd[k]);
    out.mc_error_ratio.push_back(pooled.sd[k] > 0.0 ? err / pooled.sd[k] : kNaN);
  }
  return out;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw UsageError("quantile: empty input");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

PosteriorSummary summarize(std::span<const double> values, std::size_t dim) {
  if (dim == 0 || values.size() % dim != 0) throw UsageError("summarize: ragged draw matrix");
  const std::size_t n = values.size() / dim;
  if (n < 2) throw UsageError("summarize: needs at least 2 draws");
  PosteriorSummary s;
  s.dim = dim;
  s.n = n;
  s.mean.assign(dim, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t k = 0; k < dim; ++k) s.mean[k] += values[t * dim + k];
  }
  for (auto& m : s.mean) m /= static_cast<double>(n);
  std::vector<double> cov(dim * dim, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double di = values[t * dim + i] - s.mean[i];
      for (std::size_t j = i; j < dim; ++j) cov[i * dim + j] += di * (values[t * dim + j] - s.mean[j]);
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i; j < dim; ++j) {
      cov[i * dim + j] /= static_cast<double>(n - 1);
      cov[j * dim + i] = cov[i * dim + j];
    }
  }
  s.sd.resize(dim);
  for (std::size_t k = 0; k < dim; ++k) s.sd[k] = std::sqrt(cov[k * dim + k]);
  s.correlation.assign(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      if (i == j) {
        s.correlation[i * dim + j] = 1.0;
      } else if (s.sd[i] > 0.0 && s.sd[j] > 0.0) {
        s.correlation[i * dim + j] =
            std::clamp(cov[i * dim + j] / (s.sd[i] * s.sd[j]), -1.0, 1.0);
      }
    }
    if (!(s.sd[i] > 0.0)) s.degenerate_sd = true;
  }
  for (std::size_t k = 0; k < dim; ++k) {
    std::vector<double> col(n);
    for (std::size_t t = 0; t < n; ++t) col[t] = values[t * dim + k];
    std::sort(col.begin(), col.end());
    s.q025.push_back(quantile(col, 0.025));
    s.median.push_back(quantile(col, 0.5));
    s.q975.push_back(quantile(std::move(col), 0.975));
  }
  return s;
}

PosteriorSummary summarize(const PosteriorDraws& draws) {
  return summarize(draws.values, draws.dim);
}

}  // namespace altbayes
