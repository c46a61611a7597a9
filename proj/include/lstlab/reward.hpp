#pragma once

// Epoch-boundary rewards and the allocation / chain-quality metrics.

#include "lstlab/beacon.hpp"
#include "lstlab/epoch_summary.hpp"

#include <array>
#include <string>

namespace lstlab::reward {

struct RewardWeights {
  double beta = 1.0;
  double omega = 0.0;
  double gamma = 0.0;

  void validate() const;

  static RewardWeights self_optimization() { return {1.0, 0.0, 0.5}; }
  static RewardWeights griefing() { return {0.0, 5.0, 1.5}; }
};

/// beta * (E_A - loss_A) - omega * (E_T - loss_T) + gamma * L_tail
double epoch_reward(const RewardWeights& w, const EpochSummary& s);

/// beta * (E_A + dV_A) - omega * (E_T + dV_T) + gamma * L_tail
double epoch_reward_mev(const RewardWeights& w, const EpochSummary& s);

struct AllocationLosses {
  double victim = 0.0;
  double adversary = 0.0;
};

/// Relative deviation of a realized slot count from 32 * stake. Throws UndefinedMetric for zero stake.
double relative_deviation(double realized, double stake, const char* group);

/// realized holds (adversary, target) slot counts in e+1; they may be means over many epochs.
AllocationLosses allocation_losses(std::array<double, 2> realized, const beacon::StakeConfig& stakes);

/// Slots sacrificed by the adversary plus slots displaced by its forks, over all slots.
struct ChainQuality {
  double sacrificed = 0.0;
  double displaced = 0.0;
  double total() const { return sacrificed + displaced; }
};

ChainQuality chain_quality_impact(long sacrificed_slots, long displaced_slots, long total_slots);

struct AttackMetrics {
  double victim_loss = 0.0;  // NaN when the target has no stake
  double adversary_loss = 0.0;
  double chain_quality_impact = 0.0;
  double sacrificed_fraction = 0.0;
  double displaced_fraction = 0.0;
  double mean_adversary_slots = 0.0;
  double mean_target_slots = 0.0;
  double se_adversary_slots = 0.0;
  double se_target_slots = 0.0;
  double victim_loss_se = 0.0;
  double adversary_loss_se = 0.0;
  /// Realized adversary / target value relative to the stake-proportional expectation, per epoch.
  double adversary_value_gain = 0.0;
  double target_value_loss = 0.0;
  double mean_reward = 0.0;
  double se_reward = 0.0;
  long episodes = 0;
  long epochs = 0;
};

}  // namespace lstlab::reward
