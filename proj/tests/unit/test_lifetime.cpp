#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "altbayes/lifetime.hpp"
#include "altbayes/numerics.hpp"
#include "doctest.h"

using namespace altbayes;
using doctest::Approx;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

StressCell unit_cell(std::vector<double> failures, std::size_t n, CensoringRule rule) {
  // stress 1 under the log transform gives V = 0
  return make_cell(1.0, 1.0, std::move(failures), n, rule, VTransform::log);
}

// Composite Simpson on [a, b] with n (even) intervals.
template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST_SUITE("lifetime") {
  TEST_CASE("GEBS link values") {
    StressCell c = make_cell(333.0, 0.9, {1.0}, 1, {}, VTransform::log);
    const std::array<double, 4> zero{};
    CHECK(eyring_link_gebs(zero, c) == Approx(1.0 / 333.0).epsilon(1e-15));
    StressCell unit = unit_cell({1.0}, 1, {});
    const std::array<double, 4> one = {1.0, 0.0, 0.0, 0.0};
    CHECK(eyring_link_gebs(one, unit) == Approx(std::exp(1.0)).epsilon(1e-15));
    // exp(5 + 5/353 + 5 ln 0.9 + 5 ln 0.9 / 353) / 353 at 40 digits
    StressCell hot = make_cell(353.0, 0.9, {1.0}, 1, {}, VTransform::log);
    const std::array<double, 4> fives = {5.0, 5.0, 5.0, 5.0};
    CHECK(eyring_link_gebs(fives, hot) == Approx(0.25142798111347502).epsilon(1e-14));
    CHECK(eyring_link_gew(fives, hot) == Approx(3.9772820653110914).epsilon(1e-14));
  }

  TEST_CASE("GEW link values") {
    StressCell c = make_cell(353.0, 0.9, {1.0}, 1, {}, VTransform::log);
    const std::array<double, 4> zero{};
    CHECK(eyring_link_gew(zero, c) == Approx(353.0).epsilon(1e-15));
    const std::array<double, 4> one = {1.0, 0.0, 0.0, 0.0};
    CHECK(eyring_link_gew(one, unit_cell({1.0}, 1, {})) == Approx(std::exp(-1.0)).epsilon(1e-15));
  }

  TEST_CASE("link overflow names theta") {
    const std::array<double, 4> huge = {1e4, 0.0, 0.0, 0.0};
    StressCell c = unit_cell({1.0}, 1, {});
    CHECK_THROWS_AS(eyring_link_gebs(huge, c), NumericError);
    CHECK_THROWS_WITH_AS(eyring_link_gew(huge, c), doctest::Contains("10000"), NumericError);
  }

  TEST_CASE("links are reciprocal") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z(0.0, 2.0);
    const Dataset d = reliasoft_table_data();
    for (int t = 0; t < 500; ++t) {
      const std::array<double, 4> th = {z(rng), 100 * z(rng), z(rng), 100 * z(rng)};
      for (const StressCell& c : d.cells) {
        CHECK(eyring_link_gew(th, c) * eyring_link_gebs(th, c) ==
              Approx(1.0).epsilon(4 * std::numeric_limits<double>::epsilon()));
      }
    }
  }

  TEST_CASE("Weibull density and reliability") {
    CHECK(weibull_log_pdf(1.0, 1.0, 1.0) == Approx(-1.0).epsilon(1e-15));
    CHECK(weibull_log_reliability(2.0, 1.0, 1.0) == Approx(-2.0).epsilon(1e-15));
    CHECK(weibull_log_pdf(2.0, 0.5, 2.0) == Approx(std::log(2.0) - 2.0).epsilon(1e-15));
    CHECK(weibull_log_pdf(0.0, 1.0, 0.5) == -kInf);
    CHECK(weibull_log_reliability(0.0, 1.0, 2.0) == 0.0);
  }

  TEST_CASE("Weibull density integrates to 1") {
    for (auto [a, b] : std::vector<std::pair<double, double>>{{0.5, 2.0}, {2.0, 1.0}, {0.1, 3.5}}) {
      const double mass =
          simpson([&](double x) { return std::exp(weibull_log_pdf(x, a, b)); }, 1e-300, 40.0, 200000);
      CAPTURE(a);
      CHECK(mass == Approx(1.0).epsilon(1e-8));
    }
  }

  TEST_CASE("Birnbaum-Saunders density and reliability") {
    CHECK(bs_log_reliability(7.0, 0.3, 7.0) == std::log(0.5));
    CHECK(bs_log_pdf(1.0, 1.0, 1.0) == Approx(-kLnSqrtTwoPi).epsilon(1e-15));
    for (double alpha : {0.2, 1.0, 3.0}) {
      for (double beta : {0.5, 40.0}) {
        CHECK(bs_log_pdf(beta, alpha, beta) ==
              Approx(-std::log(std::sqrt(2.0 * M_PI) * alpha * beta)).epsilon(1e-14));
      }
    }
    CHECK(bs_log_pdf(0.0, 1.0, 1.0) == -kInf);
    CHECK(bs_log_pdf(-1.0, 1.0, 1.0) == -kInf);
  }

  TEST_CASE("Birnbaum-Saunders density integrates to 1 and R decreases") {
    const double a = 0.4, b = 3.0;
    const double mass = simpson(
        [&](double x) { return x > 0 ? std::exp(bs_log_pdf(x, a, b)) : 0.0; }, 0.0, 60.0, 200000);
    CHECK(mass == Approx(1.0).epsilon(1e-8));
    double prev = 0.0;
    for (double t = 0.5; t < 50.0; t *= 1.3) {
      const double r = bs_log_reliability(t, a, b);
      CHECK(r < prev);
      prev = r;
    }
    // 1 - R(t) matches the integrated density
    const double cdf = simpson([&](double x) { return x > 0 ? std::exp(bs_log_pdf(x, a, b)) : 0.0; },
                               0.0, 4.0, 100000);
    CHECK(-std::expm1(bs_log_reliability(4.0, a, b)) == Approx(cdf).epsilon(1e-9));
  }

  TEST_CASE("likelihood on unit cells") {
    ParamVector p{Model::gew, {0.0, 0.0, 0.0, 0.0}, 1.0};
    Dataset one;
    one.cells = {unit_cell({1.0}, 1, {})};
    CHECK(log_likelihood(p, one) == Approx(-1.0).epsilon(1e-15));
    Dataset cens;
    cens.cells = {unit_cell({}, 1, {CensoringKind::type1, 2.0})};
    CHECK(log_likelihood(p, cens) == Approx(-2.0).epsilon(1e-15));
  }

  TEST_CASE("censoring variants agree") {
    const ParamVector p{Model::gebs, {1.0, 50.0, 0.5, 10.0}, 0.7};
    Dataset complete, type1_no_cens, type2, type1_same;
    complete.cells = {make_cell(340.0, 0.8, {2.0, 3.0, 5.0}, 3, {}, VTransform::log)};
    type1_no_cens.cells = {
        make_cell(340.0, 0.8, {2.0, 3.0, 5.0}, 3, {CensoringKind::type1, 9.0}, VTransform::log)};
    type2.cells = {make_cell(340.0, 0.8, {2.0, 3.0, 5.0}, 6, {CensoringKind::type2}, VTransform::log)};
    type1_same.cells = {
        make_cell(340.0, 0.8, {2.0, 3.0, 5.0}, 6, {CensoringKind::type1, 5.0}, VTransform::log)};
    CHECK(log_likelihood(p, type1_no_cens) == log_likelihood(p, complete));
    CHECK(log_likelihood(p, type2) == log_likelihood(p, type1_same));
    CHECK(type2.cells[0].censoring.tau == 5.0);
    // three extra survivors at tau = 5
    const double beta = eyring_link_gebs(p.theta, complete.cells[0]);
    CHECK(log_likelihood(p, type2) ==
          Approx(log_likelihood(p, complete) + 3 * bs_log_reliability(5.0, 0.7, beta)).epsilon(1e-14));
  }

  TEST_CASE("extreme parameters give -inf rather than an error") {
    const Dataset d = reliasoft_table_data();
    const ParamVector p{Model::gew, {1000.0, 1000.0, 1000.0, 1000.0}, 1000.0};
    CHECK(log_likelihood(p, d) == -kInf);
  }

  TEST_CASE("prior") {
    const ParamVector ones{Model::gew, {1.0, 1.0, 1.0, 1.0}, 1.0};
    CHECK(log_prior(ones, PriorSpec::uniform(1.0, 1.0)) == Approx(-5.0).epsilon(1e-15));
    CHECK(log_prior(ones, PriorSpec::uniform(1.0, 0.001)) ==
          Approx(-34.54377639491069).epsilon(1e-14));
    ParamVector edge = ones;
    edge.theta[0] = 0.0;
    CHECK(log_prior(edge, PriorSpec::uniform(1.0, 1.0)) == -kInf);
    CHECK(log_posterior_unnorm(edge, reliasoft_table_data(), PriorSpec::uniform(1.0, 1.0)) == -kInf);
    CHECK_THROWS_AS(validate(PriorSpec::uniform(0.0, 1.0)), UsageError);
    CHECK_THROWS_AS(validate(PriorSpec::uniform(1.0, -1.0)), UsageError);
  }

  TEST_CASE("prior sampling moments and determinism") {
    const std::size_t n = 100000;
    for (auto [shape, rate] : std::vector<std::pair<double, double>>{{5.0, 1.0}, {1.0, 0.001}}) {
      const auto draws = sample_prior(Model::gebs, PriorSpec::uniform(shape, rate), n, 11);
      double mean = 0.0;
      for (const ParamVector& p : draws) mean += p.theta[1];
      mean /= n;
      const double se = std::sqrt(shape) / rate / std::sqrt(static_cast<double>(n));
      CHECK(std::fabs(mean - shape / rate) < 3 * se);
    }
    const auto a = sample_prior(Model::gew, PriorSpec::uniform(5.0, 1.0), 100, 4);
    const auto b = sample_prior(Model::gew, PriorSpec::uniform(5.0, 1.0), 100, 4);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].values() == b[i].values());
  }

  TEST_CASE("reference data") {
    const Dataset d = reliasoft_table_data();
    REQUIRE(d.cells.size() == 3);
    CHECK(d.cells[0].temperature == 333.0);
    CHECK(d.cells[0].nonthermal == 0.9);
    CHECK(d.cells[0].n_items == 8);
    CHECK(d.cells[1].n_items == 4);
    CHECK(d.cells[2].n_items == 9);
    CHECK(d.total_items() == 21);
    CHECK(d.total_failures() == 21);
    CHECK(d.cells[1].v_value == std::log(0.8));
    const Dataset r = with_v_transform(d, VTransform::reciprocal);
    CHECK(r.cells[1].v_value == 1.0 / 0.8);
    CHECK(with_v_transform(d, VTransform::identity).cells[1].v_value == 0.8);
  }

  TEST_CASE("dataset validation") {
    Dataset d;
    CHECK_THROWS_AS(validate(d), UsageError);
    d.cells = {unit_cell({1.0}, 1, {})};
    CHECK_NOTHROW(validate(d));
    d.cells[0].n_items = 0;
    CHECK_THROWS_AS(validate(d), UsageError);
    CHECK_THROWS_AS(parse_model("weibull"), UsageError);
    CHECK(parse_model("gebs") == Model::gebs);
    CHECK(parse_v_transform("reciprocal") == VTransform::reciprocal);
  }
}
