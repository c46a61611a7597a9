#pragma once

// Episode state machine: proposer schedule, withheld branch, fork choice with
// proposer boost, MEV opportunity pool and per-epoch block accounting.
//
// Decision points are adversary-only. On an adversary proposal slot without a
// branch the agent picks miss (0), propose (1) or hide (2). While a branch is
// active, later adversary slots extend it automatically; the next honest block
// opens a fork-or-regret decision (1 = regret, 2 = fork when feasible).
// An uncontested branch is published at the epoch boundary.

#include "lstlab/beacon.hpp"
#include "lstlab/epoch_summary.hpp"

#include <nlohmann/json_fwd.hpp>

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace lstlab::chain {

using beacon::Group;
using Rng = std::mt19937_64;

struct MevConfig {
  bool enabled = false;
  double arrival_prob = 0.0;
  double bonus = 0.0;
  int capacity = 3;

  void validate() const;
};

struct MevPool {
  int pending = 0;
};

/// One Bernoulli(arrival_prob) arrival, clamped at capacity.
MevPool advance_mev(MevPool pool, const MevConfig& cfg, Rng& rng);

struct BlockValue {
  double value = 1.0;
  bool carries_opportunity = false;
};

/// Value of a block built now: 1 + bonus when an opportunity is pending (and consumes it), else 1.
BlockValue block_value(MevPool& pool, const MevConfig& cfg);

/// Puts a displaced block's opportunity back. Returns false when the pool is full and it is dropped.
bool return_opportunity(MevPool& pool, const MevConfig& cfg);

enum class Action : int { kMiss = 0, kHonest = 1, kPrivate = 2 };
inline constexpr int kActionCount = 3;

struct ActionMask {
  std::array<bool, kActionCount> legal{};

  bool allows(int a) const { return a >= 0 && a < kActionCount && legal[static_cast<std::size_t>(a)]; }
  int count() const { return legal[0] + legal[1] + legal[2]; }
};

enum class DecisionKind { kNone, kProposal, kForkOrRegret };

enum class SlotStatus : std::uint8_t {
  kPending,
  kCanonical,
  kMissed,
  kWithheld,
  kContestable,
  kRegretted,
  kDisplaced,
};

const char* status_label(SlotStatus s);

struct SlotRecord {
  Group group = Group::kHonest;
  int action = -1;  // -1 when the slot executed without an adversary decision
  SlotStatus status = SlotStatus::kPending;
  double value = 0.0;
};

struct PendingBlock {
  int slot = 0;  // slot within the epoch
  Group group = Group::kHonest;
  beacon::Digest contribution{};
  double value = 1.0;
  bool carries_opportunity = false;
};

struct Branch {
  bool active = false;
  std::uint64_t start_slot = 0;  // global slot index of the first withheld block
  std::vector<PendingBlock> withheld;
  std::vector<PendingBlock> competing;
  double value_private = 0.0;
  double value_public = 0.0;
};

/// Opportunity bookkeeping: arrived == consumed + pending + attached + dropped.
struct MevLedger {
  long arrived = 0;
  long consumed = 0;
  long dropped = 0;
};

struct EnvConfig {
  beacon::StakeConfig stakes;
  MevConfig mev;
  double boost = 0.4;
  /// Epochs spanned by an episode; the adversary acts in all but the last, whose
  /// schedule is the realized allocation.
  int episode_epochs = 2;

  void validate() const;
};

struct ChainState {
  EnvConfig config;
  std::uint64_t seed = 0;

  std::uint64_t epoch = 0;
  int slot = 0;  // slot within the epoch; 32 means the boundary is next
  bool slot_open = false;
  bool fork_pending = false;
  bool done = false;

  beacon::ProposerSchedule schedule_current;
  std::optional<beacon::ProposerSchedule> schedule_next;
  beacon::RandaoMix mix;

  Branch branch;
  MevPool mev;
  MevLedger ledger;

  EpochCounters counters;
  std::array<SlotRecord, beacon::kSlotsPerEpoch> records{};

  std::uint64_t global_slot() const { return epoch * beacon::kSlotsPerEpoch + static_cast<std::uint64_t>(slot); }
  DecisionKind decision() const;
  /// Value the current slot's block would carry if made canonical now.
  double current_value() const;
  /// Number of opportunities attached to withheld or contestable blocks.
  int attached_opportunities() const;
};

/// Everything an environment transition produced besides the new state.
struct SlotEvents {
  std::vector<EpochSummary> epochs;
  /// Final per-slot records of every epoch closed by this transition.
  std::vector<std::pair<std::uint64_t, std::array<SlotRecord, beacon::kSlotsPerEpoch>>> closed_epochs;
};

/// Fresh episode advanced to its first decision point.
ChainState reset(const EnvConfig& config, std::uint64_t seed, Rng& rng, SlotEvents* events = nullptr);

ActionMask legal_actions(const ChainState& state);

/// alpha * span >= (1 - alpha) * competing + boost, in per-slot committee-weight units.
bool fork_feasible(double alpha_adversary, std::uint64_t span, int competing, double boost);
bool fork_feasible(const ChainState& state, double boost);

/// Applies the action at the current decision point and auto-advances to the next one.
SlotEvents step(ChainState& state, Action action, Rng& rng);

/// Contribution of the adversary's reveal at (epoch, slot) of this episode.
beacon::Digest adversary_contribution(const ChainState& state, int slot);

nlohmann::json slot_record_json(std::uint64_t epoch, int slot, const SlotRecord& rec);

}  // namespace lstlab::chain
