#pragma once

// Leader election: the randomness mix, per-slot reveals and the stake-weighted
// proposer schedule derived from the mix at each epoch boundary.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace lstlab::beacon {

inline constexpr int kSlotsPerEpoch = 32;

/// Hash used for reveals, mix absorption and schedule draws. Recorded in result metadata.
inline constexpr std::string_view kHashName = "sha256";

enum class Group : std::uint8_t { kAdversary = 0, kTarget = 1, kHonest = 2 };
inline constexpr int kGroupCount = 3;

const char* group_label(Group g);
Group parse_group(std::string_view label);

/// Relative stakes of the three proposer groups; the honest share is implicit.
struct StakeConfig {
  double adversary = 0.0;
  double target = 0.0;

  double honest() const { return 1.0 - adversary - target; }
  double share(Group g) const;

  /// Throws UsageError unless 0 < adversary, 0 <= target and adversary + target <= 1.
  void validate() const;
};

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> bytes);

struct Reveal {
  Digest value{};
};

/// Running randomness accumulator (256 bits).
struct RandaoMix {
  Digest bits{};

  friend bool operator==(const RandaoMix&, const RandaoMix&) = default;
  std::string hex() const;
};

/// Digest that a reveal contributes to the mix. Absorbing the same contribution twice cancels it.
Digest contribution(const Reveal& reveal);

/// XOR the contribution in place; used directly by the environment to add or remove reveals.
void absorb(RandaoMix& mix, const Digest& contribution);

/// mix XOR H(reveal).
RandaoMix mix_update(const RandaoMix& mix, const Reveal& reveal);

/// Reveal of `group`'s proposer at (epoch, slot) for the episode keyed by `seed`.
Reveal derive_reveal(std::uint64_t seed, Group group, std::uint64_t epoch, int slot);

/// Initial mix of an episode.
RandaoMix genesis_mix(std::uint64_t seed);

struct ProposerSchedule {
  std::uint64_t epoch = 0;
  std::array<Group, kSlotsPerEpoch> slots{};

  Group operator[](int slot) const { return slots[static_cast<std::size_t>(slot)]; }
  int count(Group g) const;
  /// Number of consecutive slots assigned to `g` at the end of the epoch.
  int tail_run(Group g) const;
};

/// Pseudo-uniform value in [0,1) from H(mix || epoch || slot).
double slot_uniform(const RandaoMix& mix, std::uint64_t epoch, int slot);

/// Inverse-CDF selection over (adversary, target, honest) in that order.
Group select_group(double u, const StakeConfig& stakes);

ProposerSchedule draw_schedule(const RandaoMix& mix, const StakeConfig& stakes, std::uint64_t epoch);

/// Per-group slot counts without materialising the schedule.
std::array<int, kGroupCount> schedule_counts(const RandaoMix& mix, const StakeConfig& stakes,
                                             std::uint64_t epoch);

}  // namespace lstlab::beacon
