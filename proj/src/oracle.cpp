#include "lstlab/oracle.hpp"

#include "lstlab/errors.hpp"

#include <algorithm>
#include <string>

namespace lstlab::oracle {

namespace {

using chain::ChainState;
using chain::DecisionKind;
using beacon::Group;

constexpr int kSlots = beacon::kSlotsPerEpoch;

/// First slot not yet settled by the current decision.
int first_open_slot(const ChainState& s) {
  return s.decision() == DecisionKind::kProposal ? s.slot + 1 : s.slot;
}

void require_decision(const ChainState& s) {
  if (s.decision() == DecisionKind::kNone) {
    throw UsageError("oracle queried outside an adversary decision point");
  }
}

/// Mix after the current decision is resolved as `hyp`, before any later slot.
beacon::RandaoMix resolve_now(const ChainState& s, Hypothetical hyp) {
  beacon::RandaoMix mix = s.mix;
  if (s.decision() == DecisionKind::kProposal) {
    if (hyp == Hypothetical::kFork) throw UsageError("fork hypothetical requires an active branch");
    if (hyp == Hypothetical::kPropose) beacon::absorb(mix, chain::adversary_contribution(s, s.slot));
    return mix;
  }
  // fork-or-regret point
  if (hyp == Hypothetical::kSkip) throw UsageError("skip hypothetical is not defined at a fork-or-regret point");
  if (hyp == Hypothetical::kFork) {
    for (const auto& b : s.branch.withheld) beacon::absorb(mix, b.contribution);
    for (const auto& b : s.branch.competing) beacon::absorb(mix, b.contribution);
  }
  return mix;
}

}  // namespace

bool honest_reveal_pending(const ChainState& s) {
  for (int i = first_open_slot(s); i < kSlots; ++i) {
    if (s.schedule_current[i] != Group::kAdversary) return true;
  }
  return false;
}

int pure_tail_length(const ChainState& s) {
  require_decision(s);
  if (honest_reveal_pending(s)) return -1;
  return kSlots - s.slot;
}

OracleEstimate counterfactual(const ChainState& s, Hypothetical hyp) {
  require_decision(s);
  beacon::RandaoMix mix = resolve_now(s, hyp);
  if (honest_reveal_pending(s)) {
    return OracleEstimate{kSlots * s.config.stakes.adversary, kSlots * s.config.stakes.target};
  }
  for (int i = first_open_slot(s); i < kSlots; ++i) beacon::absorb(mix, chain::adversary_contribution(s, i));
  const auto counts = beacon::schedule_counts(mix, s.config.stakes, s.epoch + 1);
  return OracleEstimate{static_cast<double>(counts[0]), static_cast<double>(counts[1])};
}

TailObjective TailObjective::adversary_net() { return TailObjective{}; }

TailObjective TailObjective::suppress_target() {
  TailObjective o;
  o.adversary_weight = 0.0;
  o.target_weight = 1.0;
  o.miss_cost = 0.0;
  return o;
}

int TailPlan::misses() const { return static_cast<int>(std::count(miss.begin(), miss.end(), true)); }

TailPlan enumerate_tail(const ChainState& s, const TailObjective& objective, int cap, Hypothetical resolution) {
  require_decision(s);
  if (honest_reveal_pending(s)) throw UsageError("enumerate_tail requires a pure adversary tail");
  if (s.decision() == DecisionKind::kProposal && resolution != Hypothetical::kPropose) {
    throw UsageError("branch resolution only applies at a fork-or-regret point");
  }
  const int first = s.slot;  // the current proposal slot, or the slot after the branch's honest block
  const int t = kSlots - first;
  if (t > cap) {
    throw UsageError("tail of " + std::to_string(t) + " slots exceeds the enumeration cap of " + std::to_string(cap));
  }

  beacon::RandaoMix base = s.mix;
  if (s.decision() == DecisionKind::kForkOrRegret) base = resolve_now(s, resolution);

  std::vector<beacon::Digest> contrib;
  contrib.reserve(static_cast<std::size_t>(t));
  for (int i = 0; i < t; ++i) contrib.push_back(chain::adversary_contribution(s, first + i));

  TailPlan best;
  bool have_best = false;
  const std::uint32_t patterns = 1u << t;
  for (std::uint32_t m = 0; m < patterns; ++m) {
    beacon::RandaoMix mix = base;
    std::vector<bool> miss(static_cast<std::size_t>(t));
    double cost = 0.0;
    for (int i = 0; i < t; ++i) {
      const bool missed = (m >> i) & 1u;
      miss[static_cast<std::size_t>(i)] = missed;
      if (missed) {
        cost += objective.cost_of_miss(static_cast<std::size_t>(i));
      } else {
        beacon::absorb(mix, contrib[static_cast<std::size_t>(i)]);
      }
    }
    const auto next = beacon::draw_schedule(mix, s.config.stakes, s.epoch + 1);
    TailPlan cand;
    cand.miss = std::move(miss);
    cand.counts = {next.count(Group::kAdversary), next.count(Group::kTarget), next.count(Group::kHonest)};
    cand.tail_control = next.tail_run(Group::kAdversary);
    cand.objective = objective.adversary_weight * cand.counts[0] - objective.target_weight * cand.counts[1] +
                     objective.tail_weight * cand.tail_control - cost;
    bool better = !have_best;
    if (have_best) {
      constexpr double kEps = 1e-12;
      if (cand.objective > best.objective + kEps) {
        better = true;
      } else if (cand.objective >= best.objective - kEps) {
        const int cm = cand.misses();
        const int bm = best.misses();
        better = cm < bm || (cm == bm && cand.miss < best.miss);
      }
    }
    if (better) {
      best = std::move(cand);
      have_best = true;
    }
  }
  return best;
}

}  // namespace lstlab::oracle
