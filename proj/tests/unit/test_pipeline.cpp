#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "altbayes/numerics.hpp"
#include "altbayes/pipeline.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace altbayes;
namespace fs = std::filesystem;

namespace {

RunConfig short_run(Model m, int setting) {
  RunConfig c = reference_config(m, setting);
  c.sampler.n_chains = 2;
  c.sampler.burn_in = 2000;
  c.sampler.n_keep = 3000;
  return c;
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("fit produces diagnostics, DIC and estimates") {
    const FitResult f = fit_model(short_run(Model::gebs, 1), reliasoft_table_data());
    CHECK(f.chains.size() == 2);
    CHECK(f.pooled.size() == 6000);
    REQUIRE(f.dic.has_value());
    CHECK(f.dic->dic == doctest::Approx(f.dic->d_bar + f.dic->p_d));
    REQUIRE(f.log_mls.size() == 3);
    for (const LogMarginal& m : f.log_mls) {
      CHECK_FALSE(m.failed);
      CHECK(std::isfinite(m.log_value));
    }
  }

  TEST_CASE("tiny runs warn instead of failing") {
    RunConfig c = short_run(Model::gew, 2);
    c.sampler.n_keep = 10;
    c.sampler.n_chains = 1;
    const FitResult f = fit_model(c, reliasoft_table_data());
    CHECK_FALSE(f.diagnostics_pass);
    bool warned = false;
    for (const std::string& w : f.warnings) warned |= w.find("below length 100") != std::string::npos;
    CHECK(warned);
  }

  TEST_CASE("summary JSON and histogram") {
    const Dataset data = reliasoft_table_data();
    const FitResult f = fit_model(short_run(Model::gew, 2), data);
    std::ostringstream js, hist;
    write_summary_json(js, f, data);
    const auto j = nlohmann::json::parse(js.str());
    REQUIRE(j["parameters"].size() == 5);
    CHECK(j["parameters"][4]["name"] == "beta");
    for (const auto& p : j["parameters"]) CHECK(std::isfinite(p["mean"].get<double>()));
    CHECK(j["log_ml"].size() == 3);
    CHECK(j["config"]["label"] == "GEW_BF2");

    write_histogram_csv(hist, f);
    std::istringstream in(hist.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "parameter,bin,lower,upper,count");
    std::map<std::string, std::size_t> totals;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      ++rows;
      const std::string name = line.substr(0, line.find(','));
      totals[name] += std::stoul(line.substr(line.rfind(',') + 1));
    }
    CHECK(rows == 5 * kHistogramBins);
    for (const auto& [name, n] : totals) CHECK(n == f.pooled.size());
  }

  TEST_CASE("six reference configurations give a full report") {
    std::vector<RunConfig> configs;
    for (Model m : {Model::gew, Model::gebs}) {
      for (int s = 1; s <= 3; ++s) configs.push_back(short_run(m, s));
    }
    std::vector<FitResult> fits;
    const SelectionReport rep = compare_models(configs, reliasoft_table_data(), &fits);
    CHECK(fits.size() == 6);
    CHECK(rep.models.size() == 6);
    CHECK(rep.pairs.size() == 45);
    const fs::path dir = fs::temp_directory_path() / "altbayes_unit_report";
    fs::remove_all(dir);
    const auto files = write_report_files(dir, rep);
    std::map<std::string, std::size_t> lines;
    for (const fs::path& p : files) {
      std::ifstream is(p);
      std::stringstream ss;
      ss << is.rdbuf();
      lines[p.filename().string()] = count_lines(ss.str());
    }
    CHECK(lines["table_dic.csv"] == 7);
    CHECK(lines["table_log_ml.csv"] == 19);
    CHECK(lines["table_bayes_factors.csv"] == 46);
    CHECK(lines["table_pmp.csv"] == 46);
  }

  TEST_CASE("compare rejects mismatched estimators") {
    RunConfig a = short_run(Model::gew, 1), b = short_run(Model::gebs, 1);
    b.estimators = {Estimator::ppd};
    CHECK_THROWS_AS(compare_models({a, b}, reliasoft_table_data()), UsageError);
    CHECK_THROWS_AS(compare_models({a}, reliasoft_table_data()), UsageError);
  }

  TEST_CASE("single-chain default run on the flat GEW prior") {
    // default sampler: 1 chain, 50000 burn-in, 200000 kept draws
    const FitResult f = fit_model(reference_config(Model::gew, 1), reliasoft_table_data());
    CHECK(f.diagnostics.split_chain);
    for (std::size_t k = 0; k < kParamDim; ++k) {
      CHECK(std::isfinite(f.summary.mean[k]));
      CHECK(f.diagnostics.mc_error_ratio[k] < kMcErrorRatioGate);
    }
  }
}
