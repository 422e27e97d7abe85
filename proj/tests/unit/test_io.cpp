#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "altbayes/dataset_io.hpp"
#include "altbayes/numerics.hpp"
#include "altbayes/report.hpp"
#include "altbayes/run_config.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace altbayes;
using doctest::Approx;

namespace {

Dataset parse(const std::string& text) {
  std::istringstream is(text);
  return parse_dataset_csv(is);
}

RunConfig config(const std::string& text) {
  std::istringstream is(text);
  return parse_run_config(is);
}

LogMlTable log_ml(const std::string& text) {
  std::istringstream is(text);
  return read_log_ml_csv(is);
}

const char* kReferenceLogMl =
    "model,estimator,log_ml\n"
    "GEW_BF1,laplace_metropolis,-166.7920\nGEW_BF1,harmonic_mean,-141.5369\nGEW_BF1,ppd,-137.1797\n"
    "GEW_BF2,laplace_metropolis,-145.1006\nGEW_BF2,harmonic_mean,-141.6805\nGEW_BF2,ppd,-138.7164\n"
    "GEW_BF3,laplace_metropolis,-176.4858\nGEW_BF3,harmonic_mean,-145.1727\nGEW_BF3,ppd,-141.3472\n";

}  // namespace

TEST_SUITE("dataset_io") {
  TEST_CASE("reference data as CSV") {
    std::ostringstream os;
    write_dataset_csv(os, reliasoft_table_data());
    const Dataset d = parse(os.str());
    REQUIRE(d.cells.size() == 3);
    CHECK(d.cells[0].temperature == 333.0);
    CHECK(d.cells[0].n_items == 8);
    CHECK(d.cells[1].nonthermal == 0.8);
    CHECK(d.cells[1].n_items == 4);
    CHECK(d.cells[2].n_items == 9);
    for (const StressCell& c : d.cells) CHECK(c.censoring.kind == CensoringKind::complete);
    CHECK(d.total_items() == 21);
  }

  TEST_CASE("censoring rules") {
    const Dataset one = parse("temp_K,stress,time,status,tau\n300,1,100,censored,100\n");
    REQUIRE(one.cells.size() == 1);
    CHECK(one.cells[0].n_items == 1);
    CHECK(one.cells[0].n_failures() == 0);
    CHECK(one.cells[0].censoring.kind == CensoringKind::type1);
    CHECK(one.cells[0].censoring.tau == 100.0);

    const Dataset t2 = parse("temp_K,stress,time,status\n300,1,5,failed\n300,1,9,failed\n"
                             "300,1,9,censored\n300,1,9,censored\n");
    CHECK(t2.cells[0].censoring.kind == CensoringKind::type2);
    CHECK(t2.cells[0].n_items == 4);

    const Dataset t1 = parse("temp_K,stress,time,status\n300,1,5,failed\n300,1,12,censored\n");
    CHECK(t1.cells[0].censoring.kind == CensoringKind::type1);
    CHECK(t1.cells[0].censoring.tau == 12.0);
  }

  TEST_CASE("row errors name the line") {
    CHECK_THROWS_WITH_AS(parse("temp_K,stress,time,status\n300,1,4,failed\n300,1,-5,failed\n"),
                         doctest::Contains("line 3"), UsageError);
    CHECK_THROWS_WITH_AS(parse("temp_K,stress,time,status\n0,1,4,failed\n"),
                         doctest::Contains("line 2"), UsageError);
    CHECK_THROWS_WITH_AS(parse("temp_K,stress,time,status\n300,1,4,broken\n"),
                         doctest::Contains("line 2"), UsageError);
    CHECK_THROWS_AS(parse(""), UsageError);
    CHECK_THROWS_AS(parse("temp_K,stress,time,status\n"), UsageError);
    CHECK_THROWS_AS(parse("time,temp_K,stress,status\n1,2,3,failed\n"), UsageError);
    CHECK_THROWS_AS(parse("temp_K,stress,time,status\n300,1,abc,failed\n"), UsageError);
    CHECK_THROWS_AS(
        parse("temp_K,stress,time,status\n300,1,4,censored\n300,1,6,censored\n"), UsageError);
  }

  TEST_CASE("round trip keeps every field") {
    Dataset d;
    d.cells = {make_cell(300.0, 0.7, {3.0, 1.5, 2.25}, 5, {CensoringKind::type1, 4.0}, VTransform::log),
               make_cell(320.0, 0.9, {1.0, 2.0}, 4, {CensoringKind::type2}, VTransform::log),
               make_cell(340.0, 0.95, {0.1}, 1, {}, VTransform::log)};
    std::ostringstream os;
    write_dataset_csv(os, d);
    const Dataset back = parse(os.str());
    REQUIRE(back.cells.size() == d.cells.size());
    for (std::size_t i = 0; i < d.cells.size(); ++i) {
      const StressCell& a = d.cells[i];
      const StressCell& b = back.cells[i];
      CHECK(a.temperature == b.temperature);
      CHECK(a.nonthermal == b.nonthermal);
      CHECK(a.v_value == b.v_value);
      CHECK(a.failures == b.failures);
      CHECK(a.n_items == b.n_items);
      CHECK(a.censoring.kind == b.censoring.kind);
      CHECK(a.censoring.tau == b.censoring.tau);
    }
  }
}

TEST_SUITE("run_config") {
  TEST_CASE("defaults and overrides") {
    const RunConfig c = config(R"({"model": "gebs"})");
    CHECK(c.model == Model::gebs);
    CHECK(c.sampler.n_chains == 1);
    CHECK(c.sampler.burn_in == 50000);
    CHECK(c.sampler.n_keep == 200000);
    CHECK(c.prior.params[2].rate == 0.001);
    const RunConfig d = config(R"({"model": "gew", "priors": {"shape": 5, "rate": 1},
        "n_chains": 4, "v_transform": "reciprocal", "estimators": ["ppd"], "seed": 7})");
    CHECK(d.prior.params[4].shape == 5.0);
    CHECK(d.sampler.n_chains == 4);
    CHECK(d.v_transform == VTransform::reciprocal);
    CHECK(d.estimators == std::vector<Estimator>{Estimator::ppd});
    CHECK(d.sampler.seed == 7);
  }

  TEST_CASE("per-parameter priors") {
    const RunConfig c = config(R"({"model": "gew", "priors": [
        {"shape": 1, "rate": 1}, {"shape": 2, "rate": 1}, {"shape": 3, "rate": 1},
        {"shape": 4, "rate": 1}, {"shape": 5, "rate": 2}]})");
    CHECK(c.prior.params[3].shape == 4.0);
    CHECK(c.prior.params[4].rate == 2.0);
    CHECK_THROWS_AS(config(R"({"model": "gew", "priors": [{"shape": 1, "rate": 1}]})"), UsageError);
  }

  TEST_CASE("unknown or malformed keys are errors") {
    CHECK_THROWS_WITH_AS(config(R"({"model": "gew", "chains": 4})"), doctest::Contains("chains"),
                         UsageError);
    CHECK_THROWS_AS(config(R"({"model": "gew", "priors": {"shape": 1, "rate": 1, "scale": 2}})"),
                    UsageError);
    CHECK_THROWS_AS(config(R"({"n_chains": 4})"), UsageError);
    CHECK_THROWS_AS(config(R"({"model": "gew", "n_chains": -1})"), UsageError);
    CHECK_THROWS_AS(config(R"({"model": "gew", "n_chains": "four"})"), UsageError);
    CHECK_THROWS_AS(config(R"({"model": "gew", "estimators": ["ppd", "ppd"]})"), UsageError);
    CHECK_THROWS_AS(config("{not json"), UsageError);
  }

  TEST_CASE("serialized configuration parses back") {
    RunConfig c = reference_config(Model::gebs, 2);
    c.sampler.seed = 99;
    c.sampler.init_point = {1, 2, 3, 4, 5};
    const RunConfig back = config(run_config_to_json(c));
    CHECK(run_config_to_json(back) == run_config_to_json(c));
    CHECK(back.label == "GEBS_BF2");
    CHECK(back.prior.params[0].shape == 2.5);
  }

  TEST_CASE("reference configurations") {
    const auto all = reference_configs();
    REQUIRE(all.size() == 6);
    CHECK(all[0].label == "GEW_BF1");
    CHECK(all[2].prior.params[0].shape == 125.0);
    CHECK(all[5].label == "GEBS_BF3");
    CHECK(all[5].prior.params[0].rate == 1.0);
    CHECK_THROWS_AS(reference_config(Model::gew, 4), UsageError);
  }
}

TEST_SUITE("report") {
  TEST_CASE("log-ML table parsing") {
    const LogMlTable t = log_ml(kReferenceLogMl);
    REQUIRE(t.models.size() == 3);
    CHECK(t.estimators.size() == 3);
    CHECK(t.models[1].find(Estimator::laplace_metropolis)->log_value == -145.1006);
    const LogMlTable na = log_ml("model,estimator,log_ml\na,ppd,NA\nb,ppd,-3\n");
    CHECK(na.models[0].find(Estimator::ppd)->failed);
    CHECK_THROWS_WITH_AS(log_ml("model,estimator,log_ml\na,ppd,-1\na,ppd,-2\n"),
                         doctest::Contains("line 3"), UsageError);
    CHECK_THROWS_AS(log_ml("model,estimator,value\na,ppd,-1\n"), UsageError);
    CHECK_THROWS_AS(log_ml("model,estimator,log_ml\na,bridge,-1\n"), UsageError);
    CHECK_THROWS_AS(log_ml("model,estimator,log_ml\na,ppd,x\n"), UsageError);
  }

  TEST_CASE("tables and JSON carry the same numbers") {
    const LogMlTable t = log_ml(kReferenceLogMl);
    const SelectionReport rep = selection_report(t.models, t.estimators);
    std::ostringstream js, bf, pmp;
    write_report_json(js, rep);
    write_bayes_factor_table(bf, rep);
    write_pmp_table(pmp, rep);
    const auto j = nlohmann::json::parse(js.str());
    REQUIRE(j["pairs"].size() == 9);

    std::istringstream bf_in(bf.str()), pmp_in(pmp.str());
    std::string line;
    std::getline(bf_in, line);
    CHECK(line == "pair,estimator,bf,two_ln_bf,interpretation");
    std::getline(pmp_in, line);
    CHECK(line == "pair,estimator,pmp_i,pmp_j");
    for (const auto& p : j["pairs"]) {
      std::getline(bf_in, line);
      std::istringstream cells(line);
      std::string pair, est, bf_s, two, label;
      std::getline(cells, pair, ',');
      std::getline(cells, est, ',');
      std::getline(cells, bf_s, ',');
      std::getline(cells, two, ',');
      std::getline(cells, label);
      CHECK(est == p["estimator"].get<std::string>());
      CHECK(std::stod(bf_s) == Approx(p["bf"].get<double>()).epsilon(5e-6));
      CHECK(std::stod(two) == Approx(p["two_ln_bf"].get<double>()).epsilon(5e-6));
      CHECK(label == p["interpretation"].get<std::string>());
      // the JSON value is the full-precision one
      const std::size_t i = p["i"].get<std::size_t>() - 1, k = p["j"].get<std::size_t>() - 1;
      const double want = t.models[i].find(parse_estimator(est))->log_value -
                          t.models[k].find(parse_estimator(est))->log_value;
      CHECK(std::fabs(p["log_bf"].get<double>() - want) <= 1e-12);
      CHECK(std::fabs(p["pmp_i"].get<double>() + p["pmp_j"].get<double>() - 1.0) <= 1e-12);
    }
  }

  TEST_CASE("failed cells print NA") {
    const LogMlTable t = log_ml("model,estimator,log_ml\na,ppd,NA\nb,ppd,-3\n");
    const SelectionReport rep = selection_report(t.models, t.estimators);
    std::ostringstream bf, lm;
    write_bayes_factor_table(bf, rep);
    write_log_ml_table(lm, rep);
    CHECK(bf.str().find("1-2,ppd,NA,NA,") != std::string::npos);
    CHECK(lm.str().find("a,ppd,NA") != std::string::npos);
    std::ostringstream js;
    write_report_json(js, rep);
    CHECK(nlohmann::json::parse(js.str())["pairs"][0]["bf"].is_null());
  }

  TEST_CASE("number formatting") {
    CHECK(format_table_number(3.7979134e-10) == "3.79791e-10");
    CHECK(format_table_number(37.93217) == "37.9322");
    CHECK(format_table_number(NAN) == "NA");
  }
}
