#include "altbayes/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>

#include "altbayes/numerics.hpp"
#include "csv_util.hpp"

namespace altbayes {

namespace {

struct CellRows {
  double temperature = 0.0;
  double stress = 0.0;
  std::vector<double> failures;
  std::vector<double> censored;
  std::optional<double> tau;
  std::size_t first_line = 0;
};

}  // namespace

Dataset parse_dataset_csv(std::istream& is, VTransform transform) {
  std::vector<CellRows> cells;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  bool has_tau = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (!header_seen) {
      const std::vector<std::string> base{"temp_K", "stress", "time", "status"};
      std::vector<std::string> with_tau = base;
      with_tau.push_back("tau");
      if (f == with_tau) {
        has_tau = true;
      } else if (f != base) {
        throw UsageError(csv::where(line_no) + "expected header temp_K,stress,time,status[,tau]");
      }
      header_seen = true;
      continue;
    }
    const std::size_t want = has_tau ? 5 : 4;
    // A trailing empty tau may be omitted.
    if (!(f.size() == want || (has_tau && f.size() == 4))) {
      throw UsageError(csv::where(line_no) + "expected " + std::to_string(want) + " fields, got " +
                       std::to_string(f.size()));
    }
    const double temp = csv::parse_double(f[0], line_no, "temp_K");
    const double stress = csv::parse_double(f[1], line_no, "stress");
    const double time = csv::parse_double(f[2], line_no, "time");
    if (!(temp > 0.0) || !std::isfinite(temp)) {
      throw UsageError(csv::where(line_no) + "temp_K must be > 0");
    }
    if (!(stress > 0.0) || !std::isfinite(stress)) {
      throw UsageError(csv::where(line_no) + "stress must be > 0");
    }
    if (!(time > 0.0) || !std::isfinite(time)) {
      throw UsageError(csv::where(line_no) + "time must be > 0");
    }
    std::optional<double> tau;
    if (has_tau && f.size() == 5 && !f[4].empty()) {
      tau = csv::parse_double(f[4], line_no, "tau");
      if (!(*tau > 0.0) || !std::isfinite(*tau)) {
        throw UsageError(csv::where(line_no) + "tau must be > 0");
      }
    }

    auto it = std::find_if(cells.begin(), cells.end(), [&](const CellRows& c) {
      return c.temperature == temp && c.stress == stress;
    });
    if (it == cells.end()) {
      cells.push_back({temp, stress, {}, {}, std::nullopt, line_no});
      it = std::prev(cells.end());
    }
    if (tau) {
      if (it->tau && *it->tau != *tau) {
        throw UsageError(csv::where(line_no) + "tau differs from earlier rows of the same cell");
      }
      it->tau = tau;
    }
    if (f[3] == "failed") {
      it->failures.push_back(time);
    } else if (f[3] == "censored") {
      if (!it->censored.empty() && it->censored.front() != time) {
        throw UsageError(csv::where(line_no) +
                         "censored items of one cell must share one censoring time");
      }
      it->censored.push_back(time);
    } else {
      throw UsageError(csv::where(line_no) + "unknown status '" + f[3] +
                       "' (expected failed or censored)");
    }
  }
  if (!header_seen) throw UsageError("dataset file is empty");
  if (cells.empty()) throw UsageError("dataset has no data rows");

  Dataset d;
  d.v_transform = transform;
  for (CellRows& c : cells) {
    CensoringRule rule;
    const std::size_t n = c.failures.size() + c.censored.size();
    std::sort(c.failures.begin(), c.failures.end());
    if (c.tau) {
      rule = {CensoringKind::type1, *c.tau};
      if (!c.censored.empty() && c.censored.front() != *c.tau) {
        throw UsageError(csv::where(c.first_line) + "censored time differs from the cell's tau");
      }
    } else if (c.censored.empty()) {
      rule = {CensoringKind::complete, 0.0};
    } else if (!c.failures.empty() && c.censored.front() == c.failures.back()) {
      rule = {CensoringKind::type2, c.failures.back()};
    } else {
      rule = {CensoringKind::type1, c.censored.front()};
    }
    d.cells.push_back(make_cell(c.temperature, c.stress, std::move(c.failures), n, rule, transform));
  }
  try {
    validate(d);
  } catch (const UsageError& e) {
    throw UsageError(std::string("dataset: ") + e.what());
  }
  return d;
}

Dataset parse_dataset_csv(const std::filesystem::path& path, VTransform transform) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot open " + path.string());
  return parse_dataset_csv(is, transform);
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
  validate(data);
  bool any_type1 = false;
  for (const StressCell& c : data.cells) any_type1 |= c.censoring.kind == CensoringKind::type1;
  os << "temp_K,stress,time,status" << (any_type1 ? ",tau" : "") << '\n';
  for (const StressCell& c : data.cells) {
    const bool type1 = c.censoring.kind == CensoringKind::type1;
    const std::string tau = type1 ? csv::exact(c.censoring.tau) : "";
    const auto row = [&](double time, const char* status) {
      os << csv::exact(c.temperature) << ',' << csv::exact(c.nonthermal) << ','
         << csv::exact(time) << ',' << status;
      if (any_type1) os << ',' << tau;
      os << '\n';
    };
    for (double x : c.failures) row(x, "failed");
    for (std::size_t k = 0; k < c.n_censored(); ++k) row(c.censoring.tau, "censored");
  }
}

}  // namespace altbayes
