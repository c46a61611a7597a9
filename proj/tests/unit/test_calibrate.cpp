#include "lstlab/calibrate.hpp"
#include "lstlab/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace lstlab;
using namespace lstlab::calibrate;
namespace fs = std::filesystem;

namespace {

PriceSeries series(const std::vector<std::string>& dates, const std::vector<double>& values) {
  PriceSeries s;
  for (const auto& d : dates) s.dates.push_back(parse_date(d));
  s.values = values;
  return s;
}

/// Heteroskedasticity-only sandwich from centred sums.
double white_se(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double b = sxy / sxx;
  const double a = my - b * mx;
  double meat = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u = y[i] - a - b * x[i];
    meat += (x[i] - mx) * (x[i] - mx) * u * u;
  }
  return std::sqrt(meat) / sxx;
}

std::vector<double> fixture_x() {
  std::vector<double> x;
  for (int i = 0; i < 40; ++i) x.push_back(std::sin(i * 0.7) + 0.01 * i);
  return x;
}

std::vector<double> fixture_y() {
  const auto x = fixture_x();
  std::vector<double> y;
  for (int i = 0; i < 40; ++i) y.push_back(0.5 * x[i] + 0.2 * std::cos(i * 1.3) + 0.05 * std::sin(i * i * 0.11));
  return y;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("dates parse strictly") {
  CHECK(format_date(parse_date("2024-02-29")) == "2024-02-29");
  CHECK_THROWS_AS(parse_date("2023-02-29"), DataError);
  CHECK_THROWS_AS(parse_date("2024/01/01"), DataError);
  CHECK_THROWS_AS(parse_date("2024-1-01"), DataError);
}

TEST_CASE("normalisation is a pointwise inner join") {
  const auto lst = series({"2024-01-01", "2024-01-02"}, {2, 3});
  const auto eth = series({"2024-01-01", "2024-01-02"}, {4, 6});
  const auto r = normalize_prices(lst, eth);
  CHECK(r.values == std::vector<double>{0.5, 0.5});
  CHECK(normalize_prices(eth, eth).values == std::vector<double>{1.0, 1.0});

  const auto sparse = series({"2024-01-02"}, {3});
  const auto eth3 = series({"2024-01-01", "2024-01-02", "2024-01-03"}, {4, 6, 8});
  CHECK(normalize_prices(sparse, eth3).size() == 1);
  const auto disjoint = series({"2025-01-01"}, {1});
  CHECK_THROWS_AS(normalize_prices(disjoint, eth3), DataError);
}

TEST_CASE("forward log returns") {
  CHECK(forward_log_returns(std::vector<double>(10, 3.0), 4) == std::vector<double>(6, 0.0));
  std::vector<double> growth;
  for (int t = 0; t < 30; ++t) growth.push_back(std::exp(0.01 * t));
  for (double r : forward_log_returns(growth, 7)) CHECK(r == doctest::Approx(0.07).epsilon(1e-12));
  CHECK(forward_log_returns(std::vector<double>(8, 1.0), 7).size() == 1);
  CHECK_THROWS_AS(forward_log_returns(std::vector<double>(7, 1.0), 7), DataError);
}

TEST_CASE("correlation examples") {
  const std::vector<double> x{-2, -1, 0, 1, 2};
  std::vector<double> neg, cube;
  for (double v : x) {
    neg.push_back(-v);
    cube.push_back(v * v * v);
  }
  CHECK(correlations(x, x).pearson == doctest::Approx(1.0));
  CHECK(correlations(x, x).spearman == doctest::Approx(1.0));
  CHECK(correlations(x, neg).pearson == doctest::Approx(-1.0));
  CHECK(correlations(x, neg).spearman == doctest::Approx(-1.0));
  CHECK(correlations(x, cube).spearman == doctest::Approx(1.0));
  CHECK(correlations(x, cube).pearson < 1.0);
  CHECK_THROWS_AS(pearson(x, std::vector<double>(5, 1.0)), UndefinedMetric);
  CHECK(midranks({3, 1, 3, 2}) == std::vector<double>{3.5, 1, 3.5, 2});
}

TEST_CASE("correlation invariances on fuzzed inputs") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> x(30), y(30);
    for (int i = 0; i < 30; ++i) {
      x[i] = n(rng);
      y[i] = 0.5 * x[i] + n(rng);
    }
    const auto base = correlations(x, y);
    std::vector<double> mono, affine;
    for (double v : x) {
      mono.push_back(std::exp(v) + v * v * v);
      affine.push_back(3.0 * v - 7.0);
    }
    CHECK(correlations(mono, y).spearman == doctest::Approx(base.spearman).epsilon(1e-12));
    CHECK(correlations(affine, y).pearson == doctest::Approx(base.pearson).epsilon(1e-10));
  }
}

TEST_CASE("OLS with HAC errors matches frozen reference values") {
  const auto x = fixture_x();
  const auto y = fixture_y();
  const auto r0 = ols_hac(x, y, 0);
  CHECK(r0.beta == doctest::Approx(0.4905620266992483).epsilon(1e-12));
  CHECK(r0.intercept == doctest::Approx(0.00518744780197275).epsilon(1e-10));
  CHECK(r0.hac_se == doctest::Approx(0.03328175896904438).epsilon(1e-10));
  CHECK(r0.resid_sigma == doctest::Approx(0.15816570357176427).epsilon(1e-10));
  const auto r3 = ols_hac(x, y, 3);
  CHECK(r3.hac_se == doctest::Approx(0.036969543119907244).epsilon(1e-10));
  CHECK(r3.p_value == doctest::Approx(3.4856361991706275e-40).epsilon(1e-6));
  CHECK(ols_hac(x, y).lag == 3);
  CHECK(newey_west_lag(40) == 3);
  CHECK(newey_west_lag(1000) == 6);
}

TEST_CASE("lag zero is the White estimator") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> x(60), y(60);
    for (int i = 0; i < 60; ++i) {
      x[i] = n(rng);
      y[i] = 1.0 - 0.3 * x[i] + (1.0 + std::fabs(x[i])) * n(rng);
    }
    CHECK(ols_hac(x, y, 0).hac_se == doctest::Approx(white_se(x, y)).epsilon(1e-8));
  }
}

TEST_CASE("exact fits and degenerate designs") {
  const std::vector<double> x{0.1, 0.4, 0.2, 0.9, 0.5};
  std::vector<double> y;
  for (double v : x) y.push_back(2.0 * v);
  const auto r = ols_hac(x, y, 2);
  CHECK(r.beta == doctest::Approx(2.0));
  CHECK(r.hac_se == doctest::Approx(0.0).epsilon(1e-12));

  // a third point on the line through two others leaves the two-point slope unchanged
  const std::vector<double> px{1.0, 3.0, 2.0};
  const std::vector<double> py{5.0, 11.0, 8.0};
  CHECK(ols_hac(px, py, 0).beta == doctest::Approx((11.0 - 5.0) / (3.0 - 1.0)));

  CHECK_THROWS_AS(ols_hac(std::vector<double>(5, 0.03), y, 0), DataError);
  CHECK_THROWS_AS(ols_hac({1, 2}, {1, 2}, 0), UsageError);
}

TEST_CASE("slope matches centred normal equations on random data") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> x(50), y(50);
    for (int i = 0; i < 50; ++i) {
      x[i] = 0.03 + 0.01 * n(rng);
      y[i] = 0.2 * x[i] + 0.01 * n(rng);
    }
    double mx = 0, my = 0;
    for (int i = 0; i < 50; ++i) {
      mx += x[i] / 50;
      my += y[i] / 50;
    }
    double sxx = 0, sxy = 0;
    for (int i = 0; i < 50; ++i) {
      sxx += (x[i] - mx) * (x[i] - mx);
      sxy += (x[i] - mx) * (y[i] - my);
    }
    CHECK(ols_hac(x, y, 0).beta == doctest::Approx(sxy / sxx).epsilon(1e-8));
  }
}

TEST_CASE("synthetic AR(1) noise recovers the slope") {
  int covered = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    const int len = 800;
    std::vector<double> x(len), y(len);
    double xe = 0.0, ue = 0.0;
    for (int i = 0; i < len; ++i) {
      xe = 0.7 * xe + n(rng);
      ue = 0.5 * ue + n(rng);
      x[i] = 0.04 + 0.01 * xe;
      y[i] = 0.5 * x[i] + 0.01 * ue;
    }
    const auto r = ols_hac(x, y);
    covered += std::fabs(r.beta - 0.5) <= 3.0 * r.hac_se;
  }
  CHECK(covered >= 19);
}

TEST_CASE("CSV readers report file and line") {
  const auto dir = fs::temp_directory_path() / "lstlab_calibrate_test";
  fs::create_directories(dir);
  write_file(dir / "ok.csv", "date,price\n2024-01-01,1.0\n2024-01-02,1.1\n");
  CHECK(read_price_csv(dir / "ok.csv", "ok").size() == 2);

  write_file(dir / "bad.csv", "date,price\n2024-01-01,1.0\n2024-01-02,abc\n");
  try {
    read_price_csv(dir / "bad.csv", "bad");
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("bad.csv:3") != std::string::npos);
  }
  write_file(dir / "order.csv", "date,price\n2024-01-02,1.0\n2024-01-01,1.1\n");
  CHECK_THROWS_AS(read_price_csv(dir / "order.csv", "o"), DataError);
  write_file(dir / "neg.csv", "date,price\n2024-01-02,-1.0\n");
  CHECK_THROWS_AS(read_price_csv(dir / "neg.csv", "n"), DataError);
  write_file(dir / "noheader.csv", "2024-01-02,1.0\n");
  CHECK_THROWS_AS(read_price_csv(dir / "noheader.csv", "h"), DataError);
  CHECK_THROWS_AS(read_price_csv(dir / "missing.csv", "m"), DataError);
  fs::remove_all(dir);
}

TEST_CASE("pool calibration end to end") {
  const auto dir = fs::temp_directory_path() / "lstlab_calibrate_pool";
  fs::create_directories(dir);
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 1.0);
  std::ofstream eth(dir / "eth.csv"), lst(dir / "lst.csv"), apr(dir / "apr.csv"), flat(dir / "flat.csv");
  eth << "date,price\n";
  lst << "date,price\n";
  apr << "date,apr\n";
  flat << "date,apr\n";
  const Date start = parse_date("2022-01-01");
  double log_ratio = 0.0;
  for (int i = 0; i < 500; ++i) {
    const auto d = format_date(start + std::chrono::days(i));
    const double e = 2000.0 * std::exp(0.001 * i);
    log_ratio += 0.0001 + 0.001 * n(rng);
    eth << d << ',' << e << '\n';
    lst << d << ',' << e * std::exp(log_ratio) << '\n';
    apr << d << ',' << 0.035 + 0.003 * std::sin(i * 0.05) << '\n';
    flat << d << ",0.035\n";
  }
  eth.close();
  lst.close();
  apr.close();
  flat.close();
  const auto r = calibrate_pool(dir / "lst.csv", dir / "eth.csv", dir / "apr.csv", 60, -1, "synthetic");
  CHECK(r.n_obs == 440);
  CHECK(r.horizon == 60);
  CHECK(r.pool == "synthetic");
  CHECK(calibration_csv_row(r).rfind("synthetic,60,", 0) == 0);
  CHECK_THROWS_AS(calibrate_pool(dir / "lst.csv", dir / "eth.csv", dir / "flat.csv", 60), DataError);
  fs::remove_all(dir);
}
