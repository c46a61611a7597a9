#pragma once

// Counterfactual next-epoch allocation estimates and exhaustive tail enumeration.

#include "lstlab/chain_env.hpp"
#include "lstlab/epoch_summary.hpp"

#include <array>
#include <vector>

namespace lstlab::oracle {

enum class Hypothetical { kPropose, kSkip, kFork };

/// True if a non-adversary proposer still has to reveal after the current decision.
bool honest_reveal_pending(const chain::ChainState& state);

/// Expected (adversary, target) slots in the next epoch if `hyp` is taken now and every later
/// adversary slot of the epoch proposes. Stake-proportional while an honest reveal is pending.
OracleEstimate counterfactual(const chain::ChainState& state, Hypothetical hyp);

/// Linear objective over a candidate next-epoch schedule:
///   adversary_weight * A - target_weight * T + tail_weight * L_tail - sum(miss costs).
struct TailObjective {
  double adversary_weight = 1.0;
  double target_weight = 0.0;
  double tail_weight = 0.0;
  /// Cost of missing each remaining tail slot, in slot order. Missing entries default to `miss_cost`.
  std::vector<double> miss_costs;
  double miss_cost = 1.0;

  static TailObjective adversary_net();
  static TailObjective suppress_target();

  double cost_of_miss(std::size_t i) const { return i < miss_costs.size() ? miss_costs[i] : miss_cost; }
};

struct TailPlan {
  std::vector<bool> miss;  // one flag per remaining adversary tail slot
  double objective = 0.0;
  std::array<int, beacon::kGroupCount> counts{};
  int tail_control = 0;
  int misses() const;
};

inline constexpr int kDefaultTailCap = 12;

/// Number of adversary slots the agent still controls at this decision point (current proposal
/// slot included), or -1 if a non-adversary reveal is still pending.
int pure_tail_length(const chain::ChainState& state);

/// Best reveal/miss pattern over the remaining adversary tail. At a fork-or-regret point the branch
/// is first resolved as `resolution` (kPropose = regret, kFork = fork).
/// Ties go to fewer misses, then to the lexicographically smallest pattern.
TailPlan enumerate_tail(const chain::ChainState& state, const TailObjective& objective,
                        int cap = kDefaultTailCap, Hypothetical resolution = Hypothetical::kPropose);

}  // namespace lstlab::oracle
