#include "lstlab/reward.hpp"

#include "lstlab/errors.hpp"

#include <cmath>
#include <string>

namespace lstlab::reward {

void RewardWeights::validate() const {
  if (!(beta >= 0.0) || !(omega >= 0.0) || !(gamma >= 0.0)) {
    throw UsageError("reward weights must be non-negative");
  }
  if (beta == 0.0 && omega == 0.0 && gamma == 0.0) throw UsageError("reward weights must not all be zero");
}

double epoch_reward(const RewardWeights& w, const EpochSummary& s) {
  return w.beta * (s.expected_next.adversary - s.loss_adversary) -
         w.omega * (s.expected_next.target - s.loss_target) + w.gamma * s.tail_control;
}

double epoch_reward_mev(const RewardWeights& w, const EpochSummary& s) {
  return w.beta * (s.expected_next.adversary + s.counters.delta_value_adversary) -
         w.omega * (s.expected_next.target + s.counters.delta_value_target) + w.gamma * s.tail_control;
}

double relative_deviation(double realized, double stake, const char* group) {
  if (!(stake > 0.0)) throw UndefinedMetric(std::string(group) + " loss is undefined for zero stake");
  const double ideal = beacon::kSlotsPerEpoch * stake;
  return (realized - ideal) / ideal;
}

AllocationLosses allocation_losses(std::array<double, 2> realized, const beacon::StakeConfig& stakes) {
  return AllocationLosses{relative_deviation(realized[1], stakes.target, "victim"),
                          relative_deviation(realized[0], stakes.adversary, "adversary")};
}

ChainQuality chain_quality_impact(long sacrificed_slots, long displaced_slots, long total_slots) {
  if (total_slots <= 0) return ChainQuality{};
  const auto n = static_cast<double>(total_slots);
  return ChainQuality{static_cast<double>(sacrificed_slots) / n, static_cast<double>(displaced_slots) / n};
}

}  // namespace lstlab::reward
