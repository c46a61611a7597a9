#include "lstlab/monetize.hpp"

#include "lstlab/errors.hpp"
#include "lstlab/kv_config.hpp"
#include "lstlab/seeding.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>

namespace lstlab::monetize {

namespace {

constexpr std::uint64_t kTrialStream = 0x747269616cULL;

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw UsageError(std::string("scenario field '") + field + "' " + what);
}

struct TrialOutcome {
  double profit = 0.0;
  bool liquidated = false;
};

TrialOutcome run_trial(const ShortScenario& s, std::uint64_t seed, long i) {
  const double shock = price_shock(s, s.sigma * trial_noise(seed, i));
  return TrialOutcome{trial_profit_given_shock(s, shock), is_liquidated(s, shock)};
}

ProfitDistribution aggregate(const std::vector<TrialOutcome>& outcomes, std::uint64_t seed) {
  ProfitDistribution d;
  d.trials = static_cast<long>(outcomes.size());
  d.seed = seed;
  if (outcomes.empty()) return d;
  std::vector<double> profits;
  profits.reserve(outcomes.size());
  long liquidated = 0;
  long positive = 0;
  for (const auto& o : outcomes) {
    profits.push_back(o.profit);
    liquidated += o.liquidated;
    positive += o.profit > 0.0;
  }
  const double n = static_cast<double>(profits.size());
  d.mean = std::accumulate(profits.begin(), profits.end(), 0.0) / n;
  double ss = 0.0;
  for (double p : profits) ss += (p - d.mean) * (p - d.mean);
  d.std_error = profits.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  if (std::adjacent_find(profits.begin(), profits.end(), std::not_equal_to<>()) == profits.end()) d.std_error = 0.0;
  d.prob_profit = static_cast<double>(positive) / n;
  d.liquidation_rate = static_cast<double>(liquidated) / n;

  std::sort(profits.begin(), profits.end());
  d.min = profits.front();
  d.max = profits.back();
  for (std::size_t i = 0; i < profits.size(); ++i) {
    if (i + 1 < profits.size() && profits[i + 1] == profits[i]) continue;
    d.ecdf.push_back(EcdfPoint{profits[i], static_cast<double>(i + 1) / n});
  }
  return d;
}

}  // namespace

void ShortScenario::set_slippage_bound(double s) {
  slippage_sell = s / 2.0;
  slippage_buy = s / 2.0;
}

void ShortScenario::validate() const {
  require(std::isfinite(collateral) && collateral > 0.0, "collateral_eth", "must be > 0");
  require(ltv > 0.0 && ltv < 1.0, "ltv", "must lie in (0, 1)");
  require(rounds >= 0, "rounds", "must be >= 0");
  require(horizon_days > 0.0, "horizon_days", "must be > 0");
  require(std::isfinite(beta_hat), "beta_hat", "must be finite");
  require(sigma >= 0.0 && std::isfinite(sigma), "sigma_h", "must be >= 0");
  require(std::isfinite(degradation), "degradation_apr", "must be finite");
  require(borrow_rate >= 0.0, "borrow_rate", "must be >= 0");
  require(holding_days >= 0.0, "holding_days", "must be >= 0");
  require(slippage_sell >= 0.0 && slippage_sell < 1.0, "slippage_sell", "must lie in [0, 1)");
  require(slippage_buy >= 0.0, "slippage_buy", "must be >= 0");
  require(liq_threshold < 0.0, "liq_threshold", "must be < 0");
}

double short_exposure(double collateral, double ltv, int rounds) {
  if (ltv == 1.0) throw UsageError("short_exposure is degenerate for ltv = 1");
  if (!(ltv >= 0.0 && ltv < 1.0) || rounds < 0 || !(collateral >= 0.0)) {
    throw UsageError("short_exposure needs collateral >= 0, ltv in [0,1) and rounds >= 0");
  }
  if (ltv == 0.0) return 0.0;
  // 1 - rho^(m+1) via expm1 keeps precision when rho^(m+1) is close to 1
  const double tail = -std::expm1(static_cast<double>(rounds + 1) * std::log(ltv));
  return ltv * collateral * tail / (1.0 - ltv);
}

double short_exposure_recursive(double collateral, double ltv, int rounds) {
  double total = 0.0;
  double c = collateral;
  for (int r = 0; r <= rounds; ++r) {
    c *= ltv;
    total += c;
  }
  return total;
}

double price_shock(const ShortScenario& s, double eps) { return -std::expm1(-s.beta_hat * s.degradation + eps); }

double sample_price_shock(const ShortScenario& s, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  return price_shock(s, s.sigma * normal(rng));
}

bool is_liquidated(const ShortScenario& s, double shock) {
  if (shock <= s.liq_threshold) return true;
  const double n = short_exposure(s.collateral, s.ltv, s.rounds);
  const double raw = n * ((1.0 - s.slippage_sell) - (1.0 - shock) * (1.0 + s.slippage_buy)) -
                     n * s.borrow_rate * s.holding_days / kDaysPerYear;
  return raw <= -s.collateral;
}

double trial_profit_given_shock(const ShortScenario& s, double shock) {
  if (shock <= s.liq_threshold) return -s.collateral;
  const double n = short_exposure(s.collateral, s.ltv, s.rounds);
  const double p_sell = 1.0 - s.slippage_sell;
  const double p_buy = (1.0 - shock) * (1.0 + s.slippage_buy);
  const double borrow = n * s.borrow_rate * s.holding_days / kDaysPerYear;
  return std::max(n * (p_sell - p_buy) - borrow, -s.collateral);
}

double trial_profit(const ShortScenario& s, Rng& rng) { return trial_profit_given_shock(s, sample_price_shock(s, rng)); }

double analytic_expected_profit(const ShortScenario& s) {
  const double n = short_exposure(s.collateral, s.ltv, s.rounds);
  const double mean_shock = -std::expm1(-s.beta_hat * s.degradation + 0.5 * s.sigma * s.sigma);
  return n * ((1.0 - s.slippage_sell) - (1.0 - mean_shock) * (1.0 + s.slippage_buy)) -
         n * s.borrow_rate * s.holding_days / kDaysPerYear;
}

double honest_benchmark(double collateral, double apr, double days) { return collateral * apr * days / kDaysPerYear; }

double ProfitDistribution::ecdf_at(double x) const {
  const auto it = std::upper_bound(ecdf.begin(), ecdf.end(), x,
                                   [](double v, const EcdfPoint& p) { return v < p.profit; });
  return it == ecdf.begin() ? 0.0 : std::prev(it)->cumulative;
}

double trial_noise(std::uint64_t seed, long trial) {
  Rng rng(derive_seed(seed, kTrialStream, static_cast<std::uint64_t>(trial)));
  std::normal_distribution<double> normal(0.0, 1.0);
  return normal(rng);
}

ProfitDistribution simulate(const ShortScenario& s, long n_trials, std::uint64_t seed) {
  if (n_trials < 1) throw UsageError("n_trials must be >= 1");
  s.validate();
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(n_trials));
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n_trials; ++i) outcomes[static_cast<std::size_t>(i)] = run_trial(s, seed, i);
  return aggregate(outcomes, seed);
}

ProfitDistribution simulate_serial(const ShortScenario& s, long n_trials, std::uint64_t seed) {
  if (n_trials < 1) throw UsageError("n_trials must be >= 1");
  s.validate();
  std::vector<TrialOutcome> outcomes;
  outcomes.reserve(static_cast<std::size_t>(n_trials));
  for (long i = 0; i < n_trials; ++i) outcomes.push_back(run_trial(s, seed, i));
  return aggregate(outcomes, seed);
}

double break_even(const ShortScenario& scenario, double benchmark, const BreakEvenOptions& opt) {
  if (!(opt.lower < opt.upper) || !(opt.tolerance > 0.0)) throw UsageError("break_even needs lower < upper and tolerance > 0");
  auto excess = [&](double degradation) {
    ShortScenario s = scenario;
    s.degradation = degradation;
    return simulate(s, opt.trials, opt.seed).mean - benchmark;
  };
  const auto bracket = "[" + format_double(opt.lower) + ", " + format_double(opt.upper) + "]";

  double previous = excess(opt.lower);
  for (int k = 1; k <= opt.monotonicity_checks; ++k) {
    const double d = opt.lower + (opt.upper - opt.lower) * k / (opt.monotonicity_checks + 1);
    const double v = excess(d);
    if (v < previous - 1e-9 * (1.0 + std::fabs(previous))) {
      throw DataError("expected profit is not monotone in degradation over " + bracket);
    }
    previous = v;
  }

  double lo = opt.lower;
  double hi = opt.upper;
  if (excess(lo) > 0.0) throw OutOfRange("expected profit already exceeds the benchmark at the lower end of " + bracket);
  if (!(excess(hi) > 0.0)) throw OutOfRange("expected profit never exceeds the benchmark in " + bracket);
  while (hi - lo > opt.tolerance) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

ShortScenario scenario_from_kv(const KeyValues& kv) {
  ShortScenario s;
  s.collateral = kv.double_or("collateral_eth", s.collateral);
  s.ltv = kv.double_or("ltv", s.ltv);
  s.rounds = static_cast<int>(kv.long_or("rounds", s.rounds));
  s.horizon_days = kv.double_or("horizon_days", s.horizon_days);
  s.beta_hat = kv.get_double("beta_hat");
  s.sigma = kv.get_double("sigma_h");
  s.degradation = kv.double_or("degradation_apr", s.degradation);
  s.borrow_rate = kv.double_or("borrow_rate", s.borrow_rate);
  s.holding_days = kv.double_or("holding_days", s.holding_days);
  if (kv.has("slippage_bound")) s.set_slippage_bound(kv.get_double("slippage_bound"));
  s.slippage_sell = kv.double_or("slippage_sell", s.slippage_sell);
  s.slippage_buy = kv.double_or("slippage_buy", s.slippage_buy);
  s.liq_threshold = kv.double_or("liq_threshold", s.liq_threshold);
  s.validate();
  return s;
}

void scenario_to_kv(const ShortScenario& s, KeyValues& kv) {
  kv.set("collateral_eth", s.collateral);
  kv.set("ltv", s.ltv);
  kv.set("rounds", s.rounds);
  kv.set("horizon_days", s.horizon_days);
  kv.set("beta_hat", s.beta_hat);
  kv.set("sigma_h", s.sigma);
  kv.set("degradation_apr", s.degradation);
  kv.set("borrow_rate", s.borrow_rate);
  kv.set("holding_days", s.holding_days);
  kv.set("slippage_sell", s.slippage_sell);
  kv.set("slippage_buy", s.slippage_buy);
  kv.set("liq_threshold", s.liq_threshold);
}

ShortScenario load_scenario(const std::filesystem::path& path) { return scenario_from_kv(KeyValues::load(path)); }

void write_ecdf_csv(const ProfitDistribution& d, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "profit_eth,cumulative_fraction\n";
  for (const auto& p : d.ecdf) out << format_double(p.profit) << ',' << format_double(p.cumulative) << '\n';
}

nlohmann::json summary_json(const ProfitDistribution& d) {
  return nlohmann::json{{"trials", d.trials},
                        {"seed", d.seed},
                        {"mean_profit_eth", d.mean},
                        {"std_error_eth", d.std_error},
                        {"prob_profit", d.prob_profit},
                        {"liquidation_rate", d.liquidation_rate},
                        {"min_profit_eth", d.min},
                        {"max_profit_eth", d.max}};
}

}  // namespace lstlab::monetize
