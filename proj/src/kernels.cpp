#include "altbayes/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "altbayes/numerics.hpp"

namespace altbayes {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// (max, sum exp(v - max)) for one chunk; an all -inf chunk is (-inf, 0).
struct Partial {
  double max = -kInf;
  double scaled_sum = 0.0;
};

Partial reduce_chunk(std::span<const double> v) {
  Partial p;
  for (double x : v) p.max = std::max(p.max, x);
  if (!std::isfinite(p.max)) return p;
  for (double x : v) p.scaled_sum += std::exp(x - p.max);
  return p;
}

}  // namespace

std::vector<double> evaluate_rows(const DrawFunction& f, std::span<const double> rows,
                                  std::size_t dim, ExecPolicy policy) {
  if (dim == 0 || rows.size() % dim != 0) {
    throw UsageError("evaluate_rows: row buffer is not a multiple of dim");
  }
  const auto n = static_cast<std::ptrdiff_t>(rows.size() / dim);
  std::vector<double> out(static_cast<std::size_t>(n));
  if (policy == ExecPolicy::serial) {
    for (std::ptrdiff_t t = 0; t < n; ++t) out[t] = f(rows.subspan(t * dim, dim));
    return out;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < n; ++t) out[t] = f(rows.subspan(t * dim, dim));
  return out;
}

std::vector<double> batch_log_likelihood(const Dataset& data, Model model,
                                         std::span<const double> rows, ExecPolicy policy) {
  validate(data);
  if (rows.size() % kParamDim != 0) {
    throw UsageError("batch_log_likelihood: row buffer is not a multiple of 5");
  }
  const DrawFunction f = [&](std::span<const double> x) {
    return log_likelihood(ParamVector::from_values(model, x), data);
  };
  return evaluate_rows(f, rows, kParamDim, policy);
}

double log_sum_exp(std::span<const double> values, ExecPolicy policy) {
  if (policy == ExecPolicy::serial) return log_sum_exp(values);
  if (values.empty()) throw UsageError("log_sum_exp: empty input");

  const std::size_t n_chunks = (values.size() + kReductionChunk - 1) / kReductionChunk;
  std::vector<Partial> parts(n_chunks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n_chunks); ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kReductionChunk;
    const std::size_t len = std::min(kReductionChunk, values.size() - begin);
    parts[c] = reduce_chunk(values.subspan(begin, len));
  }

  double max = -kInf;
  for (const Partial& p : parts) max = std::max(max, p.max);
  if (max == kInf) return kInf;
  if (max == -kInf) return -kInf;
  double sum = 0.0;
  for (const Partial& p : parts) {
    if (p.max > -kInf) sum += p.scaled_sum * std::exp(p.max - max);
  }
  return max + std::log(sum);
}

double log_mean_exp(std::span<const double> values, ExecPolicy policy) {
  if (policy == ExecPolicy::serial) return log_mean_exp(values);
  return log_sum_exp(values, policy) - std::log(static_cast<double>(values.size()));
}

}  // namespace altbayes
