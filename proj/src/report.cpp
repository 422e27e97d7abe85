#include "altbayes/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "csv_util.hpp"
#include "json.hpp"

namespace altbayes {

namespace {

using nlohmann::json;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json to_json(const LogMarginal& m) {
  json j;
  j["estimator"] = to_string(m.estimator);
  j["log_ml"] = m.failed ? json(nullptr) : number_or_null(m.log_value);
  j["status"] = m.failed ? "failed" : "ok";
  j["n_samples"] = m.n_samples;
  j["message"] = m.message;
  j["max_weight_fraction"] = number_or_null(m.max_weight_fraction);
  j["unstable"] = m.unstable;
  j["condition_number"] = number_or_null(m.condition_number);
  return j;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

}  // namespace

std::string format_table_number(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_dic_table(std::ostream& os, const SelectionReport& rep) {
  os << "model,dic\n";
  for (const ModelEvidence& m : rep.models) {
    os << m.label << ',' << format_table_number(m.dic ? m.dic->dic : NAN) << '\n';
  }
}

void write_log_ml_table(std::ostream& os, const SelectionReport& rep) {
  os << "model,estimator,log_ml\n";
  for (const ModelEvidence& m : rep.models) {
    for (Estimator e : rep.estimators) {
      const LogMarginal* lm = m.find(e);
      const double v = (lm && !lm->failed) ? lm->log_value : NAN;
      os << m.label << ',' << to_string(e) << ',' << format_table_number(v) << '\n';
    }
  }
}

void write_bayes_factor_table(std::ostream& os, const SelectionReport& rep) {
  os << "pair,estimator,bf,two_ln_bf,interpretation\n";
  for (const PairwiseEntry& p : rep.pairs) {
    os << SelectionReport::pair_label(p.i, p.j) << ',' << to_string(p.estimator) << ','
       << format_table_number(p.bf.bf) << ',' << format_table_number(p.bf.two_ln_bf) << ','
       << p.interpretation << '\n';
  }
}

void write_pmp_table(std::ostream& os, const SelectionReport& rep) {
  os << "pair,estimator,pmp_i,pmp_j\n";
  for (const PairwiseEntry& p : rep.pairs) {
    os << SelectionReport::pair_label(p.i, p.j) << ',' << to_string(p.estimator) << ','
       << format_table_number(p.pmp_i) << ',' << format_table_number(p.pmp_j) << '\n';
  }
}

void write_report_json(std::ostream& os, const SelectionReport& rep) {
  json j;
  j["metadata"] = rep.metadata;
  j["estimators"] = json::array();
  for (Estimator e : rep.estimators) j["estimators"].push_back(to_string(e));
  j["models"] = json::array();
  for (std::size_t k = 0; k < rep.models.size(); ++k) {
    const ModelEvidence& m = rep.models[k];
    json jm;
    jm["index"] = k + 1;
    jm["label"] = m.label;
    jm["prior_probability"] = rep.model_priors[k];
    if (m.dic) {
      jm["dic"] = {{"d_bar", m.dic->d_bar},
                   {"d_hat", m.dic->d_hat},
                   {"p_d", m.dic->p_d},
                   {"dic", m.dic->dic}};
    } else {
      jm["dic"] = nullptr;
    }
    jm["log_ml"] = json::array();
    for (const LogMarginal& lm : m.log_mls) jm["log_ml"].push_back(to_json(lm));
    j["models"].push_back(std::move(jm));
  }
  j["pairs"] = json::array();
  for (const PairwiseEntry& p : rep.pairs) {
    j["pairs"].push_back({{"pair", SelectionReport::pair_label(p.i, p.j)},
                          {"i", p.i + 1},
                          {"j", p.j + 1},
                          {"estimator", to_string(p.estimator)},
                          {"available", p.available},
                          {"log_bf", number_or_null(p.bf.log_bf)},
                          {"bf", number_or_null(p.bf.bf)},
                          {"two_ln_bf", number_or_null(p.bf.two_ln_bf)},
                          {"interpretation", p.interpretation},
                          {"pmp_i", number_or_null(p.pmp_i)},
                          {"pmp_j", number_or_null(p.pmp_j)}});
  }
  os << j.dump(2) << '\n';
}

std::vector<std::filesystem::path> write_report_files(const std::filesystem::path& dir,
                                                      const SelectionReport& rep) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> out = {
      dir / "report.json", dir / "table_dic.csv", dir / "table_log_ml.csv",
      dir / "table_bayes_factors.csv", dir / "table_pmp.csv"};
  {
    auto os = open_out(out[0]);
    write_report_json(os, rep);
  }
  {
    auto os = open_out(out[1]);
    write_dic_table(os, rep);
  }
  {
    auto os = open_out(out[2]);
    write_log_ml_table(os, rep);
  }
  {
    auto os = open_out(out[3]);
    write_bayes_factor_table(os, rep);
  }
  {
    auto os = open_out(out[4]);
    write_pmp_table(os, rep);
  }
  return out;
}

LogMlTable read_log_ml_csv(std::istream& is) {
  LogMlTable t;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (!header_seen) {
      if (f != std::vector<std::string>{"model", "estimator", "log_ml"}) {
        throw UsageError(csv::where(line_no) + "expected header model,estimator,log_ml");
      }
      header_seen = true;
      continue;
    }
    if (f.size() != 3) throw UsageError(csv::where(line_no) + "expected 3 fields");
    if (f[0].empty()) throw UsageError(csv::where(line_no) + "empty model label");
    Estimator e;
    try {
      e = parse_estimator(f[1]);
    } catch (const UsageError& err) {
      throw UsageError(csv::where(line_no) + err.what());
    }
    LogMarginal lm;
    lm.estimator = e;
    lm.max_weight_fraction = NAN;
    lm.condition_number = NAN;
    lm.message = "supplied";
    if (f[2] == "NA") {
      lm.failed = true;
      lm.log_value = NAN;
    } else {
      lm.log_value = csv::parse_double(f[2], line_no, "log_ml");
      if (!std::isfinite(lm.log_value)) {
        throw UsageError(csv::where(line_no) + "log_ml must be finite or NA");
      }
    }
    auto it = std::find_if(t.models.begin(), t.models.end(),
                           [&](const ModelEvidence& m) { return m.label == f[0]; });
    if (it == t.models.end()) {
      t.models.push_back({f[0], std::nullopt, {}});
      it = std::prev(t.models.end());
    }
    if (it->find(e)) {
      throw UsageError(csv::where(line_no) + "duplicate entry for " + f[0] + "/" + f[1]);
    }
    it->log_mls.push_back(lm);
    if (std::find(t.estimators.begin(), t.estimators.end(), e) == t.estimators.end()) {
      t.estimators.push_back(e);
    }
  }
  if (!header_seen) throw UsageError("log-ML table is empty");
  if (t.models.empty()) throw UsageError("log-ML table has no rows");
  return t;
}

LogMlTable read_log_ml_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot open " + path.string());
  return read_log_ml_csv(is);
}

}  // namespace altbayes
