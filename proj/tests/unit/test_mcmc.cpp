#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "altbayes/diagnostics.hpp"
#include "altbayes/mcmc.hpp"
#include "altbayes/numerics.hpp"
#include "doctest.h"

using namespace altbayes;
using doctest::Approx;

namespace {

SamplingTarget one_dim(std::function<double(double)> log_density) {
  SamplingTarget t;
  t.dim = 1;
  t.log_likelihood = [f = std::move(log_density)](std::span<const double> x) { return f(x[0]); };
  t.log_prior = [](std::span<const double>) { return 0.0; };
  t.prior_mean = {1.0};
  t.draw_prior = [](std::mt19937_64& rng, std::span<double> out) {
    out[0] = std::exponential_distribution<double>(1.0)(rng);
  };
  return t;
}

SamplerConfig small_config(ProposalKind kind) {
  SamplerConfig c;
  c.n_chains = 1;
  c.burn_in = 5000;
  c.n_keep = 40000;
  c.seed = 9;
  c.proposal = kind;
  return c;
}

}  // namespace

TEST_SUITE("mcmc") {
  TEST_CASE("gamma(2,1) mean is recovered by both proposals") {
    const SamplingTarget t = one_dim([](double x) { return std::log(x) - x; });
    for (ProposalKind k : {ProposalKind::componentwise, ProposalKind::block}) {
      const PosteriorDraws d = run_chain(t, small_config(k), 0);
      const auto col = d.column(0);
      double mean = 0.0;
      for (double v : col) mean += v;
      mean /= static_cast<double>(col.size());
      CAPTURE(to_string(k));
      CHECK(std::fabs(mean - 2.0) < 3 * mc_error(col));
      CHECK(d.acceptance_rate > 0.1);
      CHECK(d.acceptance_rate < 0.9);
    }
  }

  TEST_CASE("lognormal median is recovered") {
    const SamplingTarget t =
        one_dim([](double x) { return -std::log(x) - 0.5 * std::log(x) * std::log(x); });
    const PosteriorDraws d = run_chain(t, small_config(ProposalKind::block), 0);
    std::vector<double> logs;
    for (double v : d.column(0)) logs.push_back(std::log(v));
    const double med = quantile(d.column(0), 0.5);
    // ln is monotone, so the median of ln x carries the same error as ln(median)
    CHECK(std::fabs(std::log(med)) < 3 * mc_error(logs) * 1.25);
  }

  TEST_CASE("same configuration gives identical draws") {
    const SamplingTarget t = one_dim([](double x) { return std::log(x) - x; });
    SamplerConfig c = small_config(ProposalKind::block);
    c.n_chains = 3;
    c.n_keep = 2000;
    const auto a = run_chains(t, c);
    const auto b = run_chains(t, c);
    REQUIRE(a.size() == 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].values == b[i].values);
      CHECK(a[i].log_liks == b[i].log_liks);
      CHECK(a[i].seed == chain_seed(c.seed, i));
    }
    CHECK(a[0].values != a[1].values);
  }

  TEST_CASE("chain seeds are distinct and stable") {
    CHECK(chain_seed(0, 0) != chain_seed(0, 1));
    CHECK(chain_seed(0, 1) != chain_seed(1, 0));
    CHECK(chain_seed(42, 3) == chain_seed(42, 3));
  }

  TEST_CASE("no finite starting point") {
    SamplingTarget t = one_dim([](double) { return -std::numeric_limits<double>::infinity(); });
    SamplerConfig c = small_config(ProposalKind::componentwise);
    c.init = InitMode::prior_mean;
    CHECK_THROWS_AS(run_chain(t, c, 0), InitializationError);
  }

  TEST_CASE("thinning and stored draws") {
    const SamplingTarget t = one_dim([](double x) { return std::log(x) - x; });
    SamplerConfig c = small_config(ProposalKind::componentwise);
    c.n_keep = 300;
    c.thin = 3;
    const PosteriorDraws d = run_chain(t, c, 0);
    CHECK(d.size() == 300);
    CHECK(d.values.size() == 300);
    for (std::size_t i = 0; i < d.size(); ++i) {
      CHECK(d.log_liks[i] == Approx(std::log(d.values[i]) - d.values[i]).epsilon(1e-14));
    }
  }

  TEST_CASE("sampler configuration validation") {
    SamplerConfig c;
    c.n_chains = 0;
    CHECK_THROWS_AS(validate(c), UsageError);
    c = SamplerConfig{};
    c.n_keep = 0;
    CHECK_THROWS_AS(validate(c), UsageError);
    c = SamplerConfig{};
    c.thin = 0;
    CHECK_THROWS_AS(validate(c), UsageError);
    c = SamplerConfig{};
    c.target_accept = 1.5;
    CHECK_THROWS_AS(validate(c), UsageError);
    CHECK(parse_proposal_kind("block") == ProposalKind::block);
    CHECK(parse_init_mode("mode") == InitMode::posterior_mode);
    CHECK_THROWS_AS(parse_init_mode("random"), UsageError);
  }

  TEST_CASE("draws CSV layout") {
    const SamplingTarget t = one_dim([](double x) { return std::log(x) - x; });
    SamplerConfig c = small_config(ProposalKind::componentwise);
    c.n_keep = 5;
    c.burn_in = 10;
    const auto chains = run_chains(t, c);
    std::ostringstream os;
    write_draws_csv(os, chains, {"x"});
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "chain,iteration,x,log_lik,log_prior");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 5);
  }

  TEST_CASE("reference model mixes across four chains") {
    const Dataset data = reliasoft_table_data();
    const SamplingTarget t = make_alt_target(data, PriorSpec::uniform(1.0, 0.001), Model::gew);
    SamplerConfig c;
    c.n_chains = 4;
    c.burn_in = 5000;
    c.n_keep = 10000;
    c.init = InitMode::posterior_mode;
    c.proposal = ProposalKind::block;
    const auto chains = run_chains(t, c);
    const ChainDiagnostics diag = diagnose(chains);
    CHECK_FALSE(diag.split_chain);
    for (double r : diag.r_hat) CHECK(r < 1.1);
  }
}

TEST_SUITE("diagnostics") {
  TEST_CASE("R-hat on matching and separated chains") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<std::vector<double>> same(4, std::vector<double>(10000));
    for (auto& c : same) for (double& v : c) v = z(rng);
    const double r = gelman_rubin(same);
    CHECK(r >= 0.99);
    CHECK(r <= 1.05);
    std::vector<std::vector<double>> apart(2, std::vector<double>(1000));
    for (double& v : apart[0]) v = z(rng);
    for (double& v : apart[1]) v = 10.0 + z(rng);
    CHECK(gelman_rubin(apart) > 2.0);
    const std::vector<std::vector<double>> flat(3, std::vector<double>(100, 4.0));
    CHECK(gelman_rubin(flat) == kDegenerateRhat);
    CHECK_THROWS_AS(gelman_rubin({{1, 2, 3}, {1, 2, 3}}), UsageError);
  }

  TEST_CASE("split R-hat sees a drifting single chain") {
    std::vector<double> drift(2000);
    for (std::size_t i = 0; i < drift.size(); ++i) drift[i] = static_cast<double>(i) / 100.0;
    CHECK(split_gelman_rubin({drift}) > 1.5);
  }

  TEST_CASE("batch-means error") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z(0.0, 1.0);
    const std::size_t n = 1000000;
    std::vector<double> iid(n), ar(n);
    for (double& v : iid) v = z(rng);
    const double e_iid = mc_error(iid);
    CHECK(e_iid > 0.001 / 1.5);
    CHECK(e_iid < 0.001 * 1.5);
    const double rho = 0.9;
    ar[0] = z(rng);
    for (std::size_t i = 1; i < n; ++i) ar[i] = rho * ar[i - 1] + std::sqrt(1 - rho * rho) * z(rng);
    const double ratio = mc_error(ar) / e_iid;
    const double expected = std::sqrt((1 + rho) / (1 - rho));
    CHECK(ratio > expected / 2);
    CHECK(ratio < expected * 2);
    CHECK(mc_error(std::vector<double>(200, 3.0)) == 0.0);
    CHECK_THROWS_AS(mc_error(std::vector<double>(50, 1.0)), UsageError);
  }

  TEST_CASE("summary moments and correlation") {
    const PosteriorSummary s = summarize(std::vector<double>{1, 1, 3, 3}, 2);
    CHECK(s.mean == std::vector<double>{2.0, 2.0});
    CHECK(s.corr(0, 1) == Approx(1.0));
    const PosteriorSummary anti = summarize(std::vector<double>{1, 3, 3, 1}, 2);
    CHECK(anti.corr(0, 1) == Approx(-1.0));
    const PosteriorSummary flat = summarize(std::vector<double>{1, 5, 1, 7}, 2);
    CHECK(flat.degenerate_sd);
    CHECK(flat.corr(0, 1) == 0.0);

    std::mt19937_64 rng(5);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> pairs(2000000);
    for (double& v : pairs) v = z(rng);
    CHECK(std::fabs(summarize(pairs, 2).corr(0, 1)) < 0.01);
  }

  TEST_CASE("quantile interpolation") {
    CHECK(quantile({4, 1, 3, 2}, 0.5) == 2.5);
    CHECK(quantile({4, 1, 3, 2}, 0.0) == 1.0);
    CHECK(quantile({4, 1, 3, 2}, 1.0) == 4.0);
  }

  TEST_CASE("single chain falls back to split halves") {
    SamplingTarget t;
    t.dim = 1;
    t.log_likelihood = [](std::span<const double> x) { return std::log(x[0]) - x[0]; };
    t.log_prior = [](std::span<const double>) { return 0.0; };
    t.prior_mean = {1.0};
    SamplerConfig c;
    c.n_chains = 1;
    c.burn_in = 1000;
    c.n_keep = 4000;
    const auto d = diagnose(run_chains(t, c));
    CHECK(d.split_chain);
    CHECK(d.r_hat[0] < 1.1);
  }
}
