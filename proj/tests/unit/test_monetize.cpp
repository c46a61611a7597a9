#include "lstlab/errors.hpp"
#include "lstlab/kv_config.hpp"
#include "lstlab/monetize.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

using namespace lstlab;
using namespace lstlab::monetize;

namespace {

ShortScenario pool(double beta, double sigma) {
  ShortScenario s;
  s.beta_hat = beta;
  s.sigma = sigma;
  s.set_slippage_bound(0.0005);
  return s;
}

ShortScenario frictionless(double beta, double sigma) {
  ShortScenario s = pool(beta, sigma);
  s.slippage_sell = s.slippage_buy = 0.0;
  s.borrow_rate = 0.0;
  return s;
}

}  // namespace

TEST_CASE("exposure closed form matches the recursion") {
  CHECK(short_exposure(100, 0.93, 6) == doctest::Approx(529.17).epsilon(1e-5));
  CHECK(short_exposure_recursive(100, 0.93, 6) == doctest::Approx(529.17).epsilon(1e-5));
  CHECK(short_exposure(100, 0.5, 0) == doctest::Approx(50.0));
  CHECK(short_exposure(100, 1e-9, 6) < 1e-6);
  for (int i = 1; i <= 20; ++i) {
    for (int m = 0; m < 10; ++m) {
      const double rho = 0.0475 * i;
      const double closed = short_exposure(100, rho, m);
      const double loop = short_exposure_recursive(100, rho, m);
      CHECK(std::fabs(closed - loop) <= 1e-9 * std::fabs(loop));
    }
  }
  CHECK_THROWS_AS(short_exposure(100, 1.0, 6), UsageError);
}

TEST_CASE("price shock") {
  ShortScenario s;
  s.degradation = 0.0;
  CHECK(price_shock(s, 0.0) == 0.0);
  const auto cb = pool(0.3587, 0.0);
  CHECK(-cb.beta_hat * cb.degradation == doctest::Approx(-0.014348));
  CHECK(price_shock(cb, 0.0) == doctest::Approx(0.014246).epsilon(1e-4));

  ShortScenario noisy;
  noisy.degradation = 0.0;
  noisy.sigma = 0.05;
  Rng rng(7);
  const int n = 100000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = sample_price_shock(noisy, rng);
    sum += d;
    sq += d * d;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::fabs(mean - (1.0 - std::exp(0.5 * 0.05 * 0.05))) < 3.0 * se);
}

TEST_CASE("trial profit identities") {
  const auto s = pool(0.3587, 0.0073);
  CHECK(trial_profit_given_shock(s, -0.03) == -100.0);
  CHECK(is_liquidated(s, -0.03));
  CHECK(trial_profit_given_shock(s, -0.0215) == -100.0);

  ShortScenario five = frictionless(0.0, 0.0);
  five.collateral = 500.0 / 0.5;
  five.ltv = 0.5;
  five.rounds = 0;  // N = 500
  CHECK(trial_profit_given_shock(five, 0.01) == doctest::Approx(5.0));

  const double n = short_exposure(100, 0.93, 6);
  const double borrow = n * 0.0217 * 60 / 365;
  CHECK(borrow == doctest::Approx(1.887).epsilon(1e-3));
  ShortScenario no_slip = pool(0.0, 0.0);
  no_slip.slippage_sell = no_slip.slippage_buy = 0.0;
  CHECK(trial_profit_given_shock(no_slip, 0.0) == doctest::Approx(-borrow));
}

TEST_CASE("profit never falls below the collateral loss") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    ShortScenario s = pool(u(rng), 0.1 * u(rng));
    s.ltv = 0.01 + 0.98 * u(rng);
    s.rounds = static_cast<int>(rng() % 15);
    s.borrow_rate = 0.5 * u(rng);
    s.set_slippage_bound(0.01 * u(rng));
    const double shock = -0.5 + u(rng);
    CHECK_FALSE(trial_profit_given_shock(s, shock) < -s.collateral);
  }
}

TEST_CASE("deterministic scenario gives a single ECDF step") {
  const auto s = frictionless(0.3587, 0.0);
  const auto d = simulate(s, 500, 3);
  REQUIRE(d.ecdf.size() == 1);
  CHECK(d.ecdf[0].cumulative == 1.0);
  CHECK(d.min == d.max);
  CHECK(d.std_error == 0.0);

  const auto one = simulate(pool(0.3587, 0.0073), 1, 3);
  CHECK(one.ecdf.size() == 1);
  CHECK_THROWS_AS(simulate(s, 0, 3), UsageError);
}

TEST_CASE("ECDF shape and profit probability") {
  const auto d = simulate(pool(0.2564, 0.0052), 20000, 11);
  double prev = 0.0;
  double prev_x = -1e300;
  for (const auto& p : d.ecdf) {
    CHECK(p.cumulative > prev);
    CHECK(p.profit > prev_x);
    prev = p.cumulative;
    prev_x = p.profit;
  }
  CHECK(d.ecdf.back().cumulative == 1.0);
  CHECK(d.prob_profit == doctest::Approx(1.0 - d.ecdf_at(0.0)));
  CHECK(d.ecdf_at(d.min - 1.0) == 0.0);
}

TEST_CASE("parallel and serial simulations agree exactly") {
  const auto s = pool(0.1389, 0.0076);
  const auto a = simulate(s, 30000, 5);
  const auto b = simulate_serial(s, 30000, 5);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  REQUIRE(a.ecdf.size() == b.ecdf.size());
  for (std::size_t i = 0; i < a.ecdf.size(); ++i) CHECK(a.ecdf[i].profit == b.ecdf[i].profit);
}

TEST_CASE("expected profit is monotone under common random numbers") {
  const auto base = pool(0.3587, 0.0073);
  auto mean_with = [&](auto tweak) {
    ShortScenario s = base;
    tweak(s);
    return simulate(s, 5000, 9).mean;
  };
  double prev = -1e300;
  for (double d = 0.0; d <= 0.1; d += 0.01) {
    const double m = mean_with([&](ShortScenario& s) { s.degradation = d; });
    CHECK(m >= prev);
    prev = m;
  }
  prev = 1e300;
  for (double slip : {0.0, 0.0005, 0.001, 0.002, 0.004}) {
    const double m = mean_with([&](ShortScenario& s) { s.set_slippage_bound(slip); });
    CHECK(m <= prev);
    prev = m;
  }
  prev = 1e300;
  for (double r : {0.0, 0.01, 0.0217, 0.05}) {
    const double m = mean_with([&](ShortScenario& s) { s.borrow_rate = r; });
    CHECK(m <= prev);
    prev = m;
  }
}

TEST_CASE("wider slippage pushes the thinnest margin towards zero") {
  auto rp = pool(0.1389, 0.0076);
  const double at_low = simulate(rp, 10000, 4).mean;
  rp.set_slippage_bound(0.002);
  const double at_high = simulate(rp, 10000, 4).mean;
  CHECK(at_high < at_low);
  CHECK(std::fabs(at_high) < 0.3);
}

TEST_CASE("analytic oracle and break-even") {
  const auto cb = pool(0.3587, 0.0073);
  const double analytic = analytic_expected_profit(cb);
  CHECK(simulate(cb, 10000, 1).mean == doctest::Approx(analytic).epsilon(0.25));
  CHECK(honest_benchmark(100, 0.03, 60) == doctest::Approx(0.49315).epsilon(1e-4));

  BreakEvenOptions opt;
  opt.trials = 2000;
  const double be = break_even(cb, honest_benchmark(100, 0.03, 60), opt);
  CHECK(be > 0.0);
  CHECK(be < 0.04);
  ShortScenario at = cb;
  at.degradation = be + opt.tolerance;
  CHECK(simulate(at, opt.trials, opt.seed).mean > honest_benchmark(100, 0.03, 60));

  CHECK_THROWS_AS(break_even(pool(0.0, 0.0073), honest_benchmark(100, 0.03, 60), opt), OutOfRange);
}

TEST_CASE("scenario files are validated field by field") {
  auto kv = KeyValues::parse("beta_hat = 0.3587\nsigma_h = 0.0073\nslippage_bound = 0.0005\n");
  const auto s = scenario_from_kv(kv);
  CHECK(s.slippage_sell == 0.00025);
  CHECK(s.slippage_bound() == doctest::Approx(0.0005));
  KeyValues echo;
  scenario_to_kv(s, echo);
  const auto again = scenario_from_kv(echo);
  CHECK(again.slippage_buy == s.slippage_buy);
  CHECK(again.beta_hat == s.beta_hat);

  auto bad = kv;
  bad.set("ltv", 1.5);
  try {
    scenario_from_kv(bad);
    FAIL("expected a usage error");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("'ltv'") != std::string::npos);
  }
  CHECK_THROWS_AS(scenario_from_kv(KeyValues::parse("beta_hat = 0.1\n")), UsageError);
}
