#include "lstlab/calibrate.hpp"

#include "lstlab/errors.hpp"
#include "lstlab/kv_config.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace lstlab::calibrate {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

DatedSeries read_two_column(const std::filesystem::path& path, const std::string& label, bool positive) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  DatedSeries out;
  out.label = label;
  std::string line;
  int line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string row = trim(line);
    if (row.empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no) + ": ";
    const auto comma = row.find(',');
    if (comma == std::string::npos || row.find(',', comma + 1) != std::string::npos) {
      throw DataError(where + "expected exactly two comma-separated columns");
    }
    const std::string first = trim(row.substr(0, comma));
    const std::string second = trim(row.substr(comma + 1));
    if (header) {
      header = false;
      if (first == "date") continue;
      throw DataError(where + "missing header row 'date,<value>'");
    }
    Date d;
    try {
      d = parse_date(first);
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
    double v = 0.0;
    const auto res = std::from_chars(second.data(), second.data() + second.size(), v);
    if (second.empty() || res.ec != std::errc{} || res.ptr != second.data() + second.size() || !std::isfinite(v)) {
      throw DataError(where + "value '" + second + "' is not a number");
    }
    if (positive && !(v > 0.0)) throw DataError(where + "price must be positive");
    if (!out.dates.empty() && !(d > out.dates.back())) throw DataError(where + "dates must be strictly increasing");
    out.dates.push_back(d);
    out.values.push_back(v);
  }
  if (header) throw DataError(path.string() + ": file is empty");
  return out;
}

/// Index pairs (i, j) with a.dates[i] == b.dates[j].
std::vector<std::pair<std::size_t, std::size_t>> join(const DatedSeries& a, const DatedSeries& b) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a.dates[i] < b.dates[j]) {
      ++i;
    } else if (b.dates[j] < a.dates[i]) {
      ++j;
    } else {
      out.emplace_back(i++, j++);
    }
  }
  return out;
}

void require_pair(const std::vector<double>& x, const std::vector<double>& y, std::size_t min_n) {
  if (x.size() != y.size()) throw UsageError("series lengths differ");
  if (x.size() < min_n) throw UsageError("need at least " + std::to_string(min_n) + " observations");
}

}  // namespace

Date parse_date(const std::string& text) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  char tail = 0;
  if (text.size() != 10 || std::sscanf(text.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
    throw DataError("date '" + text + "' is not ISO-8601 (YYYY-MM-DD)");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw DataError("date '" + text + "' does not exist");
  return Date{ymd};
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

PriceSeries read_price_csv(const std::filesystem::path& path, const std::string& label) {
  return read_two_column(path, label, true);
}

DatedSeries read_apr_csv(const std::filesystem::path& path, const std::string& label) {
  return read_two_column(path, label, false);
}

PriceSeries normalize_prices(const PriceSeries& lst, const PriceSeries& eth) {
  const auto pairs = join(lst, eth);
  if (pairs.empty()) throw DataError("price series " + lst.label + " and " + eth.label + " share no dates");
  PriceSeries out;
  out.label = lst.label + "/" + eth.label;
  for (const auto& [i, j] : pairs) {
    out.dates.push_back(lst.dates[i]);
    out.values.push_back(lst.values[i] / eth.values[j]);
  }
  return out;
}

std::vector<double> forward_log_returns(const std::vector<double>& p, int horizon) {
  if (horizon < 1) throw UsageError("horizon must be >= 1");
  if (static_cast<std::size_t>(horizon) >= p.size()) {
    throw DataError("horizon " + std::to_string(horizon) + " needs more than " + std::to_string(p.size()) + " rows");
  }
  std::vector<double> r(p.size() - static_cast<std::size_t>(horizon));
  for (std::size_t t = 0; t < r.size(); ++t) r[t] = std::log(p[t + static_cast<std::size_t>(horizon)]) - std::log(p[t]);
  return r;
}

DatedSeries forward_log_returns(const PriceSeries& series, int horizon) {
  DatedSeries out;
  out.label = series.label;
  out.values = forward_log_returns(series.values, horizon);
  out.dates.assign(series.dates.begin(), series.dates.begin() + static_cast<std::ptrdiff_t>(out.values.size()));
  return out;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  require_pair(x, y, 3);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedMetric("correlation is undefined for a constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> midranks(const std::vector<double>& x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> rank(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

Correlations correlations(const std::vector<double>& x, const std::vector<double>& y) {
  return Correlations{pearson(x, y), pearson(midranks(x), midranks(y))};
}

int newey_west_lag(std::size_t n) {
  return static_cast<int>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
}

OlsResult ols_hac(const std::vector<double>& x, const std::vector<double>& y, int lag) {
  require_pair(x, y, 3);
  const std::size_t n = x.size();
  OlsResult r;
  r.n = static_cast<long>(n);
  r.lag = lag < 0 ? newey_west_lag(n) : lag;

  // X'X = [[n, sx], [sx, sxx]]; only the slope row of its inverse is needed
  const double dn = static_cast<double>(n);
  double sx = 0.0;
  double sxx = 0.0;
  double sy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sxx += x[i] * x[i];
    sy += y[i];
    sxy += x[i] * y[i];
  }
  const double det = dn * sxx - sx * sx;
  const double mx = sx / dn;
  double centered = 0.0;
  for (double v : x) centered += (v - mx) * (v - mx);
  if (!(centered > 0.0) || det <= 0.0) throw DataError("singular design: regressor is constant");
  const double inv01 = -sx / det;
  const double inv11 = dn / det;
  r.beta = (dn * sxy - sx * sy) / det;
  r.intercept = (sy - r.beta * sx) / dn;

  std::vector<double> u(n);
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = y[i] - r.intercept - r.beta * x[i];
    ssr += u[i] * u[i];
  }
  r.resid_sigma = std::sqrt(ssr / (dn - 2.0));

  // Meat: sum_j w_j sum_t (u_t x_t)(u_{t-j} x_{t-j})' symmetrised, with x_t = (1, x_t)
  double s00 = 0.0;
  double s01 = 0.0;
  double s11 = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    s00 += u[t] * u[t];
    s01 += u[t] * u[t] * x[t];
    s11 += u[t] * u[t] * x[t] * x[t];
  }
  for (int j = 1; j <= r.lag && static_cast<std::size_t>(j) < n; ++j) {
    const double w = 1.0 - static_cast<double>(j) / (r.lag + 1.0);
    double g00 = 0.0;
    double g01 = 0.0;
    double g10 = 0.0;
    double g11 = 0.0;
    for (std::size_t t = static_cast<std::size_t>(j); t < n; ++t) {
      const double a = u[t];
      const double b = u[t - static_cast<std::size_t>(j)];
      const double xa = x[t];
      const double xb = x[t - static_cast<std::size_t>(j)];
      g00 += a * b;
      g01 += a * b * xb;
      g10 += a * b * xa;
      g11 += a * b * xa * xb;
    }
    s00 += w * 2.0 * g00;
    s01 += w * (g01 + g10);
    s11 += w * 2.0 * g11;
  }
  // slope variance of inv * S * inv
  const double v11 = inv01 * (inv01 * s00 + inv11 * s01) + inv11 * (inv01 * s01 + inv11 * s11);
  r.hac_se = std::sqrt(std::max(v11, 0.0));
  if (r.hac_se > 0.0) {
    r.p_value = std::erfc(std::fabs(r.beta / r.hac_se) / std::sqrt(2.0));
  } else {
    r.p_value = r.beta == 0.0 ? 1.0 : 0.0;
  }
  return r;
}

CalibrationResult calibrate_series(const PriceSeries& lst, const PriceSeries& eth, const DatedSeries& apr,
                                   int horizon, int lag) {
  const auto ratio = normalize_prices(lst, eth);
  const auto returns = forward_log_returns(ratio, horizon);
  const auto pairs = join(apr, returns);
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& [i, j] : pairs) {
    x.push_back(apr.values[i]);
    y.push_back(returns.values[j]);
  }
  if (x.size() < 3) throw DataError("fewer than 3 dates align between APR and " + std::to_string(horizon) + "-day returns");
  CalibrationResult r;
  r.pool = lst.label;
  r.horizon = horizon;
  const auto fit = ols_hac(x, y, lag);
  const auto c = correlations(x, y);
  r.pearson = c.pearson;
  r.spearman = c.spearman;
  r.beta = fit.beta;
  r.intercept = fit.intercept;
  r.hac_se = fit.hac_se;
  r.p_value = fit.p_value;
  r.resid_sigma = fit.resid_sigma;
  r.n_obs = fit.n;
  r.lag = fit.lag;
  return r;
}

CalibrationResult calibrate_pool(const std::filesystem::path& lst_csv, const std::filesystem::path& eth_csv,
                                 const std::filesystem::path& apr_csv, int horizon, int lag, const std::string& pool) {
  const std::string label = pool.empty() ? lst_csv.stem().string() : pool;
  const auto lst = read_price_csv(lst_csv, label);
  const auto eth = read_price_csv(eth_csv, "ETH");
  const auto apr = read_apr_csv(apr_csv, label + " APR");
  try {
    return calibrate_series(lst, eth, apr, horizon, lag);
  } catch (const UndefinedMetric& e) {
    throw UndefinedMetric(label + " (" + lst_csv.string() + ", " + apr_csv.string() + "): " + e.what());
  } catch (const DataError& e) {
    throw DataError(label + " (" + lst_csv.string() + ", " + apr_csv.string() + "): " + e.what());
  }
}

nlohmann::json calibration_json(const CalibrationResult& r) {
  return nlohmann::json{{"pool", r.pool},         {"horizon", r.horizon},     {"pearson", r.pearson},
                        {"spearman", r.spearman}, {"beta", r.beta},           {"intercept", r.intercept},
                        {"hac_se", r.hac_se},     {"p_value", r.p_value},     {"resid_sigma", r.resid_sigma},
                        {"n_obs", r.n_obs},       {"lag", r.lag}};
}

std::string calibration_csv_header() {
  return "pool,horizon,pearson,spearman,beta,intercept,hac_se,p_value,resid_sigma,n_obs,lag";
}

std::string calibration_csv_row(const CalibrationResult& r) {
  return r.pool + "," + std::to_string(r.horizon) + "," + format_double(r.pearson) + "," + format_double(r.spearman) +
         "," + format_double(r.beta) + "," + format_double(r.intercept) + "," + format_double(r.hac_se) + "," +
         format_double(r.p_value) + "," + format_double(r.resid_sigma) + "," + std::to_string(r.n_obs) + "," +
         std::to_string(r.lag);
}

}  // namespace lstlab::calibrate
