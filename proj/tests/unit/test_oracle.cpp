#include "lstlab/errors.hpp"
#include "lstlab/oracle.hpp"

#include <doctest.h>

using namespace lstlab;
using namespace lstlab::oracle;
using beacon::Group;
using chain::ChainState;

namespace {

constexpr int kSlots = beacon::kSlotsPerEpoch;

/// Proposal point at `slot` whose remaining slots are all adversary.
ChainState tail_state(std::uint64_t seed, int slot, beacon::StakeConfig stakes = {0.3, 0.2}) {
  ChainState s;
  s.config.stakes = stakes;
  s.seed = seed;
  s.mix = beacon::genesis_mix(seed * 7919 + 1);
  s.schedule_current.slots.fill(Group::kHonest);
  for (int i = slot; i < kSlots; ++i) s.schedule_current.slots[static_cast<std::size_t>(i)] = Group::kAdversary;
  s.slot = slot;
  return s;
}

std::array<int, 3> brute_counts(const beacon::RandaoMix& mix, const beacon::StakeConfig& st, std::uint64_t epoch) {
  std::array<int, 3> c{};
  for (int j = 0; j < kSlots; ++j) {
    const double u = beacon::slot_uniform(mix, epoch, j);
    const int g = u < st.adversary ? 0 : (u < st.adversary + st.target ? 1 : 2);
    ++c[static_cast<std::size_t>(g)];
  }
  return c;
}

double pattern_objective(const ChainState& s, unsigned pattern, int t) {
  beacon::RandaoMix mix = s.mix;
  int misses = 0;
  for (int i = 0; i < t; ++i) {
    if ((pattern >> i) & 1u) {
      ++misses;
    } else {
      beacon::absorb(mix, beacon::contribution(beacon::derive_reveal(s.seed, Group::kAdversary, s.epoch, s.slot + i)));
    }
  }
  return brute_counts(mix, s.config.stakes, s.epoch + 1)[0] - misses;
}

}  // namespace

TEST_CASE("pending honest reveals force stake-proportional estimates") {
  chain::EnvConfig cfg;
  cfg.stakes = {0.2, 0.2};
  chain::Rng rng(4);
  const auto s = chain::reset(cfg, 4, rng);
  REQUIRE(honest_reveal_pending(s));
  for (auto h : {Hypothetical::kPropose, Hypothetical::kSkip}) {
    const auto e = counterfactual(s, h);
    CHECK(e.adversary == doctest::Approx(6.4));
    CHECK(e.target == doctest::Approx(6.4));
  }
  CHECK_THROWS_AS(counterfactual(s, Hypothetical::kFork), UsageError);
  CHECK(pure_tail_length(s) == -1);
  CHECK_THROWS_AS(enumerate_tail(s, TailObjective::adversary_net()), UsageError);
}

TEST_CASE("full adversary stake always yields 32 slots") {
  chain::EnvConfig cfg;
  cfg.stakes = {1.0, 0.0};
  chain::Rng rng(9);
  const auto s = chain::reset(cfg, 9, rng);
  for (auto h : {Hypothetical::kPropose, Hypothetical::kSkip}) {
    const auto e = counterfactual(s, h);
    CHECK(e.adversary == 32.0);
    CHECK(e.target == 0.0);
  }
}

TEST_CASE("last-slot estimates equal the schedules of the two candidate mixes") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto s = tail_state(seed, 31);
    auto with = s.mix;
    beacon::absorb(with, chain::adversary_contribution(s, 31));
    const auto prop = counterfactual(s, Hypothetical::kPropose);
    const auto skip = counterfactual(s, Hypothetical::kSkip);
    CHECK(prop.adversary == beacon::draw_schedule(with, s.config.stakes, 1).count(Group::kAdversary));
    CHECK(prop.target == beacon::draw_schedule(with, s.config.stakes, 1).count(Group::kTarget));
    CHECK(skip.adversary == beacon::draw_schedule(s.mix, s.config.stakes, 1).count(Group::kAdversary));
    CHECK(skip.target == beacon::draw_schedule(s.mix, s.config.stakes, 1).count(Group::kTarget));

    const auto plan = enumerate_tail(s, TailObjective::adversary_net());
    CHECK(plan.miss.size() == 1);
    CHECK(plan.objective == std::max(pattern_objective(s, 0, 1), pattern_objective(s, 1, 1)));
  }
}

TEST_CASE("three-slot tails match a brute-force loop") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto s = tail_state(seed, 29);
    double best = -1e9;
    unsigned best_pattern = 0;
    int best_misses = 99;
    for (unsigned p = 0; p < 8; ++p) {
      const double v = pattern_objective(s, p, 3);
      const int m = __builtin_popcount(p);
      // lexicographic order on (slot 29, 30, 31) flags: earlier reveals first
      auto lex_less = [](unsigned a, unsigned b) {
        for (int i = 0; i < 3; ++i) {
          const bool x = (a >> i) & 1u;
          const bool y = (b >> i) & 1u;
          if (x != y) return !x;
        }
        return false;
      };
      if (v > best || (v == best && (m < best_misses || (m == best_misses && lex_less(p, best_pattern))))) {
        best = v;
        best_pattern = p;
        best_misses = m;
      }
    }
    const auto plan = enumerate_tail(s, TailObjective::adversary_net());
    CHECK(plan.objective == best);
    for (int i = 0; i < 3; ++i) CHECK(plan.miss[static_cast<std::size_t>(i)] == bool((best_pattern >> i) & 1u));
    CHECK(plan.objective >= pattern_objective(s, 0, 3));
    CHECK(pure_tail_length(s) == 3);
  }
}

TEST_CASE("an empty tail returns the regret outcome") {
  ChainState s = tail_state(3, kSlots);
  s.schedule_current.slots[30] = Group::kAdversary;
  s.schedule_current.slots[31] = Group::kHonest;
  s.branch.active = true;
  s.branch.start_slot = 30;
  s.branch.withheld.push_back({30, Group::kAdversary, chain::adversary_contribution(s, 30), 1.0, false});
  const auto honest = beacon::contribution(beacon::derive_reveal(s.seed, Group::kHonest, 0, 31));
  s.branch.competing.push_back({31, Group::kHonest, honest, 1.0, false});
  beacon::absorb(s.mix, honest);
  s.fork_pending = true;
  REQUIRE(s.decision() == chain::DecisionKind::kForkOrRegret);

  const auto plan = enumerate_tail(s, TailObjective::adversary_net());
  CHECK(plan.miss.empty());
  CHECK(plan.counts[0] == beacon::draw_schedule(s.mix, s.config.stakes, 1).count(Group::kAdversary));

  auto forked = s.mix;
  beacon::absorb(forked, s.branch.withheld[0].contribution);
  beacon::absorb(forked, honest);
  const auto fork_plan = enumerate_tail(s, TailObjective::adversary_net(), kDefaultTailCap, Hypothetical::kFork);
  CHECK(fork_plan.counts[0] == beacon::draw_schedule(forked, s.config.stakes, 1).count(Group::kAdversary));
  CHECK(counterfactual(s, Hypothetical::kFork).adversary == fork_plan.counts[0]);
  CHECK_THROWS_AS(counterfactual(s, Hypothetical::kSkip), UsageError);
}

TEST_CASE("tails longer than the cap are refused") {
  const auto s = tail_state(1, 20);
  CHECK(pure_tail_length(s) == 12);
  CHECK_NOTHROW(enumerate_tail(s, TailObjective::adversary_net(), 12));
  CHECK_THROWS_AS(enumerate_tail(s, TailObjective::adversary_net(), 11), UsageError);
}

TEST_CASE("estimates stay in range along random play") {
  chain::EnvConfig cfg;
  cfg.stakes = {0.4, 0.3};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    chain::Rng rng(seed);
    auto s = chain::reset(cfg, seed, rng);
    while (!s.done) {
      const auto mask = chain::legal_actions(s);
      for (auto h : {Hypothetical::kPropose, Hypothetical::kSkip, Hypothetical::kFork}) {
        const bool defined = s.decision() == chain::DecisionKind::kProposal ? h != Hypothetical::kFork
                                                                              : h != Hypothetical::kSkip;
        if (!defined) continue;
        const auto e = counterfactual(s, h);
        CHECK(e.adversary >= 0.0);
        CHECK(e.target >= 0.0);
        CHECK(e.adversary + e.target <= 32.0);
      }
      const int a = mask.legal[2] ? 2 : (rng() % 2 == 0 ? 1 : (mask.legal[0] ? 0 : 1));
      chain::step(s, static_cast<chain::Action>(a), rng);
    }
  }
}

TEST_CASE("target suppression objective prefers fewer target slots") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = tail_state(seed, 28);
    const auto plan = enumerate_tail(s, TailObjective::suppress_target());
    for (unsigned p = 0; p < 16; ++p) {
      beacon::RandaoMix mix = s.mix;
      for (int i = 0; i < 4; ++i) {
        if (!((p >> i) & 1u)) beacon::absorb(mix, chain::adversary_contribution(s, 28 + i));
      }
      CHECK(plan.counts[1] <= brute_counts(mix, s.config.stakes, 1)[1]);
    }
  }
}
