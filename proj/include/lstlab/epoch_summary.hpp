#pragma once

#include "lstlab/beacon.hpp"

#include <array>
#include <cstdint>

namespace lstlab {

/// Expected next-epoch slot counts for the adversary and the target pool.
struct OracleEstimate {
  double adversary = 0.0;
  double target = 0.0;
};

/// Per-group block accounting for one epoch. canonical + missed + regretted + displaced == 32.
struct EpochCounters {
  std::array<int, beacon::kGroupCount> canonical{};
  std::array<int, beacon::kGroupCount> displaced{};
  std::array<double, beacon::kGroupCount> canonical_value{};
  int missed = 0;     // adversary slots left empty
  int regretted = 0;  // withheld adversary blocks abandoned
  double delta_value_adversary = 0.0;
  double delta_value_target = 0.0;

  int sacrificed() const { return missed + regretted; }
  int displaced_total() const { return displaced[0] + displaced[1] + displaced[2]; }
  int canonical_total() const { return canonical[0] + canonical[1] + canonical[2]; }
};

/// Everything the reward and metric functions need about a finished epoch.
struct EpochSummary {
  std::uint64_t epoch = 0;
  /// Exact at the boundary: the mix is final, so this equals the realized next-epoch counts.
  OracleEstimate expected_next;
  int loss_adversary = 0;
  int loss_target = 0;
  int tail_control = 0;
  EpochCounters counters;
  std::array<int, beacon::kGroupCount> realized_next{};
};

}  // namespace lstlab
