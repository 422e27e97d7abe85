#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "altbayes/lifetime.hpp"

namespace altbayes {

// serial is the reference path kept for testing; parallel splits work over
// OpenMP threads with fixed chunk boundaries, so its result does not depend
// on the thread count.
enum class ExecPolicy { serial, parallel };

inline constexpr std::size_t kReductionChunk = 4096;

using DrawFunction = std::function<double(std::span<const double>)>;

// f applied to every row of a row-major n x dim matrix.
std::vector<double> evaluate_rows(const DrawFunction& f, std::span<const double> rows,
                                  std::size_t dim, ExecPolicy policy);

// log_likelihood of `model` on `data` at every row (ParamVector order).
std::vector<double> batch_log_likelihood(const Dataset& data, Model model,
                                         std::span<const double> rows, ExecPolicy policy);

// Same contract as log_sum_exp / log_mean_exp in numerics.hpp. The parallel
// path reduces kReductionChunk-sized chunks independently and then combines
// the chunk results in index order.
double log_sum_exp(std::span<const double> values, ExecPolicy policy);
double log_mean_exp(std::span<const double> values, ExecPolicy policy);

}  // namespace altbayes
