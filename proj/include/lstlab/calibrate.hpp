#pragma once

// Daily price and APR series, forward log returns, correlation and OLS with Newey-West (Bartlett) HAC errors.

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace lstlab::calibrate {

using Date = std::chrono::sys_days;

/// Rows of (date, value) with strictly increasing dates.
struct DatedSeries {
  std::string label;
  std::vector<Date> dates;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

using PriceSeries = DatedSeries;

Date parse_date(const std::string& text);
std::string format_date(Date d);

/// Two-column CSV with a header row. Prices must be positive. Errors carry file:line.
PriceSeries read_price_csv(const std::filesystem::path& path, const std::string& label);
DatedSeries read_apr_csv(const std::filesystem::path& path, const std::string& label);

/// Inner join on dates; pointwise lst / eth.
PriceSeries normalize_prices(const PriceSeries& lst, const PriceSeries& eth);

/// r_t = ln p_{t+H} - ln p_t over row indices; n - H values.
std::vector<double> forward_log_returns(const std::vector<double>& prices, int horizon);
/// Same, dated by the start row t.
DatedSeries forward_log_returns(const PriceSeries& series, int horizon);

struct Correlations {
  double pearson = 0.0;
  double spearman = 0.0;
};

double pearson(const std::vector<double>& x, const std::vector<double>& y);
/// Ranks starting at 1; ties receive the mean of their positions.
std::vector<double> midranks(const std::vector<double>& x);
Correlations correlations(const std::vector<double>& x, const std::vector<double>& y);

struct OlsResult {
  double beta = 0.0;
  double intercept = 0.0;
  double hac_se = 0.0;
  double p_value = 1.0;
  double resid_sigma = 0.0;  // sqrt(SSR / (n - 2))
  long n = 0;
  int lag = 0;
};

/// floor(4 (n/100)^(2/9))
int newey_west_lag(std::size_t n);

/// Regresses y on [1, x]. A negative lag selects newey_west_lag(n).
OlsResult ols_hac(const std::vector<double>& x, const std::vector<double>& y, int lag = -1);

struct CalibrationResult {
  std::string pool;
  int horizon = 0;
  double pearson = 0.0;
  double spearman = 0.0;
  double beta = 0.0;
  double intercept = 0.0;
  double hac_se = 0.0;
  double p_value = 1.0;
  double resid_sigma = 0.0;
  long n_obs = 0;
  int lag = 0;
};

/// Normalise, take H-day forward returns, align with the APR series and regress returns on APR.
CalibrationResult calibrate_pool(const std::filesystem::path& lst_csv, const std::filesystem::path& eth_csv,
                                 const std::filesystem::path& apr_csv, int horizon, int lag = -1,
                                 const std::string& pool = "");
CalibrationResult calibrate_series(const PriceSeries& lst, const PriceSeries& eth, const DatedSeries& apr,
                                   int horizon, int lag = -1);

nlohmann::json calibration_json(const CalibrationResult& r);
std::string calibration_csv_header();
std::string calibration_csv_row(const CalibrationResult& r);

}  // namespace lstlab::calibrate
