#pragma once

#include <filesystem>
#include <iosfwd>

#include "altbayes/lifetime.hpp"

namespace altbayes {

// Reads `temp_K,stress,time,status[,tau]` rows (status failed or censored).
// Rows with the same (temp_K, stress) form one cell, in order of first
// appearance. A cell's censoring rule is derived from its censored rows:
//   none                           -> complete
//   tau column set                 -> type1 with that tau
//   censored time == last failure  -> type2
//   otherwise                      -> type1 at the censored time
// Censored rows of one cell must share one censoring time. Errors name the
// offending line.
Dataset parse_dataset_csv(std::istream& is, VTransform transform = VTransform::log);
Dataset parse_dataset_csv(const std::filesystem::path& path,
                          VTransform transform = VTransform::log);

// Inverse of parse_dataset_csv: failures first, then one row per censored
// item at tau. The tau column is filled only for type-I cells.
void write_dataset_csv(std::ostream& os, const Dataset& data);

}  // namespace altbayes
