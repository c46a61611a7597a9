#pragma once

// Leveraged-short Monte Carlo: recursive borrowing exposure, lognormal price shock, execution slippage,
// liquidation and borrowing cost. Prices are normalised so that P0 = 1 and profits are in ETH.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace lstlab {
class KeyValues;
}

namespace lstlab::monetize {

using Rng = std::mt19937_64;

inline constexpr double kDaysPerYear = 365.0;

struct ShortScenario {
  double collateral = 100.0;        // ETH
  double ltv = 0.93;
  int rounds = 6;
  double horizon_days = 60.0;
  double beta_hat = 0.0;            // log-return per unit of APR degradation
  double sigma = 0.0;               // residual std of horizon log returns
  double degradation = 0.04;        // APR-equivalent performance drop
  double borrow_rate = 0.0217;      // annualised
  double holding_days = 60.0;
  double slippage_sell = 0.00025;   // per-side execution bounds
  double slippage_buy = 0.00025;
  double liq_threshold = -0.0215;   // adverse (negative) price move that wipes the collateral

  /// Total round-trip slippage bound split evenly across the two legs.
  void set_slippage_bound(double s);
  double slippage_bound() const { return slippage_sell + slippage_buy; }

  void validate() const;
};

/// rho * C * (1 - rho^(m+1)) / (1 - rho). Throws UsageError for rho == 1.
double short_exposure(double collateral, double ltv, int rounds);
/// The same sum accumulated round by round (C_{r+1} = rho * C_r).
double short_exposure_recursive(double collateral, double ltv, int rounds);

/// 1 - exp(-beta * degradation + eps); positive values are price drops.
double price_shock(const ShortScenario& s, double eps);
double sample_price_shock(const ShortScenario& s, Rng& rng);

/// Profit for a realised price shock. Never below -collateral.
double trial_profit_given_shock(const ShortScenario& s, double shock);
double trial_profit(const ShortScenario& s, Rng& rng);
bool is_liquidated(const ShortScenario& s, double shock);

/// Closed-form expected profit ignoring the liquidation tail.
double analytic_expected_profit(const ShortScenario& s);

/// Honest staking yield on the collateral over the holding period.
double honest_benchmark(double collateral, double apr, double days);

struct EcdfPoint {
  double profit = 0.0;
  double cumulative = 0.0;
};

struct ProfitDistribution {
  long trials = 0;
  std::uint64_t seed = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double prob_profit = 0.0;
  double liquidation_rate = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<EcdfPoint> ecdf;  // one point per distinct profit, cumulative fraction at that value

  /// Fraction of trials with profit <= x.
  double ecdf_at(double x) const;
};

/// Trial i draws its noise from a generator keyed by (seed, i). Parallel and serial variants agree exactly.
ProfitDistribution simulate(const ShortScenario& s, long n_trials, std::uint64_t seed);
ProfitDistribution simulate_serial(const ShortScenario& s, long n_trials, std::uint64_t seed);

/// Standard-normal noise of trial i; shared across scenarios to give common random numbers.
double trial_noise(std::uint64_t seed, long trial);

struct BreakEvenOptions {
  double lower = 0.0;
  double upper = 0.2;
  double tolerance = 1e-4;
  long trials = 10000;
  std::uint64_t seed = 1;
  int monotonicity_checks = 9;
};

/// Smallest degradation whose expected profit exceeds `benchmark`, by bisection with common random numbers.
/// Throws OutOfRange when the bracket holds no crossing.
double break_even(const ShortScenario& scenario, double benchmark, const BreakEvenOptions& opt);

ShortScenario scenario_from_kv(const KeyValues& kv);
void scenario_to_kv(const ShortScenario& s, KeyValues& kv);
ShortScenario load_scenario(const std::filesystem::path& path);

void write_ecdf_csv(const ProfitDistribution& d, const std::filesystem::path& path);
nlohmann::json summary_json(const ProfitDistribution& d);

}  // namespace lstlab::monetize
