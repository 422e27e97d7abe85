#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "altbayes/selection.hpp"

namespace altbayes {

// 6 significant digits for presentation tables; "NA" for NaN.
std::string format_table_number(double v);

// Report tables, one row per cell:
//   model,dic
//   model,estimator,log_ml
//   pair,estimator,bf,two_ln_bf,interpretation
//   pair,estimator,pmp_i,pmp_j
void write_dic_table(std::ostream& os, const SelectionReport& rep);
void write_log_ml_table(std::ostream& os, const SelectionReport& rep);
void write_bayes_factor_table(std::ostream& os, const SelectionReport& rep);
void write_pmp_table(std::ostream& os, const SelectionReport& rep);

// Full report with 17 significant digits.
void write_report_json(std::ostream& os, const SelectionReport& rep);

// Writes report.json and the four tables into `dir` (created if needed).
// Returns the paths written.
std::vector<std::filesystem::path> write_report_files(const std::filesystem::path& dir,
                                                      const SelectionReport& rep);

/// Log marginal likelihoods supplied from outside, e.g. a published table.
struct LogMlTable {
  std::vector<ModelEvidence> models;  // in order of first appearance
  std::vector<Estimator> estimators;  // in order of first appearance
};

// CSV with header model,estimator,log_ml. "NA" marks a failed estimate.
// Errors name the offending line.
LogMlTable read_log_ml_csv(std::istream& is);
LogMlTable read_log_ml_csv(const std::filesystem::path& path);

}  // namespace altbayes
