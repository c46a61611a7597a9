#include "lstlab/chain_env.hpp"

#include "lstlab/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace lstlab::chain {

namespace {

constexpr int kSlots = beacon::kSlotsPerEpoch;

SlotRecord& record(ChainState& s, int slot) { return s.records[static_cast<std::size_t>(slot)]; }

void reset_epoch_books(ChainState& s) {
  s.counters = EpochCounters{};
  for (int i = 0; i < kSlots; ++i) {
    record(s, i) = SlotRecord{s.schedule_current[i], -1, SlotStatus::kPending, 0.0};
  }
}

BlockValue take_value(ChainState& s) {
  if (!s.config.mev.enabled) return BlockValue{1.0, false};
  return block_value(s.mev, s.config.mev);
}

void open_slot(ChainState& s, Rng& rng) {
  if (s.slot_open) return;
  if (s.config.mev.enabled) {
    const int before = s.mev.pending;
    s.mev = advance_mev(s.mev, s.config.mev, rng);
    s.ledger.arrived += s.mev.pending - before;
  }
  s.slot_open = true;
}

void close_slot(ChainState& s) {
  ++s.slot;
  s.slot_open = false;
}

void give_back(ChainState& s, const PendingBlock& b) {
  if (!b.carries_opportunity) return;
  if (!return_opportunity(s.mev, s.config.mev)) ++s.ledger.dropped;
}

void make_canonical(ChainState& s, const PendingBlock& b) {
  ++s.counters.canonical[static_cast<std::size_t>(b.group)];
  s.counters.canonical_value[static_cast<std::size_t>(b.group)] += b.value;
  record(s, b.slot).status = SlotStatus::kCanonical;
  if (b.carries_opportunity) ++s.ledger.consumed;
}

void withhold(ChainState& s, int action) {
  const BlockValue bv = take_value(s);
  if (!s.branch.active) {
    s.branch.active = true;
    s.branch.start_slot = s.global_slot();
  }
  s.branch.withheld.push_back(
      PendingBlock{s.slot, Group::kAdversary, adversary_contribution(s, s.slot), bv.value, bv.carries_opportunity});
  s.branch.value_private += bv.value;
  auto& rec = record(s, s.slot);
  rec.action = action;
  rec.status = SlotStatus::kWithheld;
  rec.value = bv.value;
}

void honest_propose(ChainState& s) {
  const Group g = s.schedule_current[s.slot];
  const BlockValue bv = take_value(s);
  PendingBlock block{s.slot, g, beacon::contribution(beacon::derive_reveal(s.seed, g, s.epoch, s.slot)), bv.value,
                     bv.carries_opportunity};
  beacon::absorb(s.mix, block.contribution);
  auto& rec = record(s, s.slot);
  rec.value = bv.value;
  if (s.branch.active) {
    rec.status = SlotStatus::kContestable;
    s.branch.competing.push_back(block);
    s.branch.value_public += bv.value;
    s.fork_pending = true;
  } else {
    make_canonical(s, block);
  }
}

void clear_branch(ChainState& s) { s.branch = Branch{}; }

void publish_branch(ChainState& s) {
  for (const auto& b : s.branch.withheld) {
    beacon::absorb(s.mix, b.contribution);
    make_canonical(s, b);
  }
  clear_branch(s);
}

void close_epoch(ChainState& s, SlotEvents* events) {
  if (s.branch.active) publish_branch(s);  // uncontested: no competing block reached the boundary

  const auto next = beacon::draw_schedule(s.mix, s.config.stakes, s.epoch + 1);
  EpochSummary summary;
  summary.epoch = s.epoch;
  summary.realized_next = {next.count(Group::kAdversary), next.count(Group::kTarget), next.count(Group::kHonest)};
  summary.expected_next = OracleEstimate{static_cast<double>(summary.realized_next[0]),
                                         static_cast<double>(summary.realized_next[1])};
  summary.loss_adversary = s.counters.sacrificed();
  summary.loss_target = s.counters.displaced[static_cast<std::size_t>(Group::kTarget)];
  summary.tail_control = next.tail_run(Group::kAdversary);
  summary.counters = s.counters;
  if (events != nullptr) {
    events->epochs.push_back(summary);
    events->closed_epochs.emplace_back(s.epoch, s.records);
  }

  s.schedule_next = next;
  if (static_cast<int>(s.epoch) + 2 >= s.config.episode_epochs) {
    s.done = true;
    return;
  }
  ++s.epoch;
  s.slot = 0;
  s.slot_open = false;
  s.schedule_current = next;
  s.schedule_next.reset();
  reset_epoch_books(s);
}

void advance(ChainState& s, Rng& rng, SlotEvents* events) {
  while (!s.done) {
    if (s.fork_pending) return;
    if (s.slot == kSlots) {
      close_epoch(s, events);
      continue;
    }
    open_slot(s, rng);
    if (s.schedule_current[s.slot] == Group::kAdversary) {
      if (!s.branch.active) return;  // proposal decision
      withhold(s, -1);
      close_slot(s);
      continue;
    }
    honest_propose(s);
    close_slot(s);
  }
}

void apply_proposal(ChainState& s, Action a) {
  auto& rec = record(s, s.slot);
  switch (a) {
    case Action::kMiss:
      rec.action = 0;
      rec.status = SlotStatus::kMissed;
      rec.value = 0.0;
      ++s.counters.missed;
      s.counters.delta_value_adversary -= s.current_value();
      break;
    case Action::kHonest: {
      const BlockValue bv = take_value(s);
      const PendingBlock block{s.slot, Group::kAdversary, adversary_contribution(s, s.slot), bv.value,
                               bv.carries_opportunity};
      beacon::absorb(s.mix, block.contribution);
      make_canonical(s, block);
      rec.action = 1;
      rec.value = bv.value;
      break;
    }
    case Action::kPrivate:
      withhold(s, 2);
      break;
  }
  close_slot(s);
}

void apply_fork_decision(ChainState& s, Action a) {
  if (a == Action::kHonest) {
    for (const auto& b : s.branch.withheld) {
      record(s, b.slot).status = SlotStatus::kRegretted;
      ++s.counters.regretted;
      s.counters.delta_value_adversary -= b.value;
      give_back(s, b);
    }
    for (const auto& b : s.branch.competing) make_canonical(s, b);
  } else {
    for (const auto& b : s.branch.withheld) {
      beacon::absorb(s.mix, b.contribution);
      make_canonical(s, b);
    }
    for (const auto& b : s.branch.competing) {
      beacon::absorb(s.mix, b.contribution);  // removes the displaced reveal
      ++s.counters.displaced[static_cast<std::size_t>(b.group)];
      record(s, b.slot).status = SlotStatus::kDisplaced;
      s.counters.delta_value_adversary += b.value;
      if (b.group == Group::kTarget) s.counters.delta_value_target -= b.value;
      give_back(s, b);
    }
  }
  // The decision is recorded on the block that triggered it.
  if (!s.branch.competing.empty()) record(s, s.branch.competing.back().slot).action = static_cast<int>(a);
  clear_branch(s);
  s.fork_pending = false;
}

}  // namespace

void MevConfig::validate() const {
  if (!(arrival_prob >= 0.0 && arrival_prob <= 1.0)) throw UsageError("mev arrival_prob must lie in [0,1]");
  if (capacity < 1) throw UsageError("mev capacity must be >= 1");
  if (enabled && !(bonus > 0.0)) throw UsageError("mev bonus must be > 0 when enabled");
}

MevPool advance_mev(MevPool pool, const MevConfig& cfg, Rng& rng) {
  std::bernoulli_distribution arrival(cfg.arrival_prob);
  const bool x = arrival(rng);
  pool.pending = std::min(pool.pending + (x ? 1 : 0), cfg.capacity);
  return pool;
}

BlockValue block_value(MevPool& pool, const MevConfig& cfg) {
  if (pool.pending > 0) {
    --pool.pending;
    return BlockValue{1.0 + cfg.bonus, true};
  }
  return BlockValue{1.0, false};
}

bool return_opportunity(MevPool& pool, const MevConfig& cfg) {
  if (pool.pending >= cfg.capacity) return false;
  ++pool.pending;
  return true;
}

const char* status_label(SlotStatus s) {
  switch (s) {
    case SlotStatus::kPending: return "pending";
    case SlotStatus::kCanonical: return "canonical";
    case SlotStatus::kMissed: return "missed";
    case SlotStatus::kWithheld: return "withheld";
    case SlotStatus::kContestable: return "contestable";
    case SlotStatus::kRegretted: return "regretted";
    case SlotStatus::kDisplaced: return "displaced";
  }
  return "?";
}

void EnvConfig::validate() const {
  stakes.validate();
  mev.validate();
  if (!(boost >= 0.0)) throw UsageError("proposer boost must be >= 0");
  if (episode_epochs < 2) throw UsageError("episode_epochs must be >= 2");
}

DecisionKind ChainState::decision() const {
  if (done) return DecisionKind::kNone;
  if (fork_pending) return DecisionKind::kForkOrRegret;
  if (slot < kSlots && schedule_current[slot] == Group::kAdversary && !branch.active) return DecisionKind::kProposal;
  return DecisionKind::kNone;
}

double ChainState::current_value() const {
  if (!config.mev.enabled) return 1.0;
  return mev.pending > 0 ? 1.0 + config.mev.bonus : 1.0;
}

int ChainState::attached_opportunities() const {
  int n = 0;
  for (const auto& b : branch.withheld) n += b.carries_opportunity;
  for (const auto& b : branch.competing) n += b.carries_opportunity;
  return n;
}

beacon::Digest adversary_contribution(const ChainState& state, int slot) {
  return beacon::contribution(beacon::derive_reveal(state.seed, Group::kAdversary, state.epoch, slot));
}

ChainState reset(const EnvConfig& config, std::uint64_t seed, Rng& rng, SlotEvents* events) {
  config.validate();
  ChainState s;
  s.config = config;
  s.seed = seed;
  s.mix = beacon::genesis_mix(seed);
  s.schedule_current = beacon::draw_schedule(s.mix, config.stakes, 0);
  reset_epoch_books(s);
  advance(s, rng, events);
  return s;
}

bool fork_feasible(double alpha_adversary, std::uint64_t span, int competing, double boost) {
  if (std::isinf(boost)) return false;
  return alpha_adversary * static_cast<double>(span) >=
         (1.0 - alpha_adversary) * static_cast<double>(competing) + boost;
}

bool fork_feasible(const ChainState& state, double boost) {
  if (!state.branch.active) throw UsageError("fork_feasible requires an active branch");
  const std::uint64_t span = state.global_slot() - state.branch.start_slot;
  return fork_feasible(state.config.stakes.adversary, span, static_cast<int>(state.branch.competing.size()), boost);
}

ActionMask legal_actions(const ChainState& state) {
  switch (state.decision()) {
    case DecisionKind::kProposal:
      return ActionMask{{true, true, true}};
    case DecisionKind::kForkOrRegret:
      return ActionMask{{false, true, fork_feasible(state, state.config.boost)}};
    case DecisionKind::kNone:
      break;
  }
  throw UsageError("legal_actions queried outside an adversary decision point");
}

SlotEvents step(ChainState& state, Action action, Rng& rng) {
  const ActionMask mask = legal_actions(state);
  if (!mask.allows(static_cast<int>(action))) {
    throw MaskViolation("action " + std::to_string(static_cast<int>(action)) + " is not legal here");
  }
  if (state.decision() == DecisionKind::kForkOrRegret) {
    apply_fork_decision(state, action);
  } else {
    apply_proposal(state, action);
  }
  SlotEvents events;
  advance(state, rng, &events);
  return events;
}

nlohmann::json slot_record_json(std::uint64_t epoch, int slot, const SlotRecord& rec) {
  return nlohmann::json{{"type", "slot"},
                        {"epoch", epoch},
                        {"slot", slot},
                        {"group", beacon::group_label(rec.group)},
                        {"action", rec.action},
                        {"canonical", rec.status == SlotStatus::kCanonical},
                        {"displaced", rec.status == SlotStatus::kDisplaced},
                        {"status", status_label(rec.status)},
                        {"value", rec.value}};
}

}  // namespace lstlab::chain
