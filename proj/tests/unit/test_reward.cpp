#include "lstlab/errors.hpp"
#include "lstlab/reward.hpp"
#include "lstlab/strategy.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace lstlab;
using namespace lstlab::reward;

namespace {

EpochSummary summary(double ea, int la, double et, int lt, int tail) {
  EpochSummary s;
  s.expected_next = {ea, et};
  s.loss_adversary = la;
  s.loss_target = lt;
  s.tail_control = tail;
  return s;
}

}  // namespace

TEST_CASE("epoch reward arithmetic") {
  CHECK(epoch_reward({1.0, 5.0, 1.5}, summary(6.4, 1, 5.0, 2, 2)) == doctest::Approx(-6.6));
  CHECK(epoch_reward({1.0, 0.0, 0.0}, summary(7.0, 2, 3.0, 0, 4)) == doctest::Approx(5.0));
  CHECK(epoch_reward({1.0, 0.0, 0.0}, summary(6.4, 0, 0.0, 0, 0)) == doctest::Approx(6.4));

  EpochSummary m = summary(6.4, 0, 0.0, 0, 0);
  m.counters.delta_value_adversary = -2.0;
  CHECK(epoch_reward_mev({1.0, 0.0, 0.0}, m) == doctest::Approx(4.4));
}

TEST_CASE("unit block values reduce the value reward to the loss reward") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 32.0);
  for (int i = 0; i < 1000; ++i) {
    EpochSummary s = summary(u(rng), static_cast<int>(rng() % 5), u(rng), static_cast<int>(rng() % 5),
                             static_cast<int>(rng() % 8));
    s.counters.delta_value_adversary = -s.loss_adversary;
    s.counters.delta_value_target = -s.loss_target;
    const RewardWeights w{u(rng), u(rng), u(rng)};
    CHECK(epoch_reward_mev(w, s) == doctest::Approx(epoch_reward(w, s)));
  }
}

TEST_CASE("reward is linear in each weight and monotone in the adversary loss") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const auto s = summary(u(rng), static_cast<int>(rng() % 6), u(rng), static_cast<int>(rng() % 6),
                           static_cast<int>(rng() % 6));
    const RewardWeights w{u(rng), u(rng), u(rng)};
    const RewardWeights w2{2 * w.beta, w.omega, w.gamma};
    CHECK(epoch_reward(w2, s) - epoch_reward(w, s) ==
          doctest::Approx(w.beta * (s.expected_next.adversary - s.loss_adversary)));
    if (s.loss_adversary > 0) {
      auto better = s;
      better.loss_adversary -= 1;
      const RewardWeights no_omega{w.beta, 0.0, w.gamma};
      CHECK(epoch_reward(no_omega, better) >= epoch_reward(no_omega, s));
    }
  }
}

TEST_CASE("allocation losses") {
  const auto ideal = allocation_losses({6.4, 6.4}, {0.2, 0.2});
  CHECK(ideal.victim == doctest::Approx(0.0));
  CHECK(ideal.adversary == doctest::Approx(0.0));

  CHECK(allocation_losses({6.4, 5.87}, {0.2, 0.2}).victim == doctest::Approx(-0.083).epsilon(0.003));

  const auto asym = allocation_losses({32 * 0.1 * (1 - 0.026), 32 * 0.3 * (1 - 0.029)}, {0.1, 0.3});
  CHECK(asym.adversary == doctest::Approx(-0.026));
  CHECK(asym.victim == doctest::Approx(-0.029));
  CHECK(std::fabs(asym.victim) > std::fabs(asym.adversary));

  CHECK_THROWS_AS(allocation_losses({6.4, 0.0}, {0.2, 0.0}), UndefinedMetric);
  CHECK_THROWS_AS(relative_deviation(1.0, 0.0, "victim"), UndefinedMetric);
}

TEST_CASE("chain quality impact") {
  CHECK(chain_quality_impact(0, 0, 320).total() == 0.0);
  CHECK(chain_quality_impact(1, 0, 32).total() == doctest::Approx(0.03125));
  const auto cq = chain_quality_impact(3, 5, 64);
  CHECK(cq.sacrificed >= 0.0);
  CHECK(cq.displaced >= 0.0);
  CHECK(cq.total() == doctest::Approx(cq.sacrificed + cq.displaced));
}

TEST_CASE("weights validation and presets") {
  CHECK_THROWS_AS(RewardWeights({0, 0, 0}).validate(), UsageError);
  CHECK_THROWS_AS(RewardWeights({-1, 0, 0}).validate(), UsageError);
  CHECK(RewardWeights::self_optimization().gamma == 0.5);
  CHECK(RewardWeights::griefing().omega == 5.0);
  CHECK(RewardWeights::griefing().gamma == 1.5);
  CHECK(RewardWeights::griefing().beta == 0.0);
}

TEST_CASE("honest play has zero allocation losses within 3 SE") {
  chain::EnvConfig env;
  env.stakes = {0.2, 0.2};
  env.episode_epochs = 2;
  const auto honest = strategy::Policy::baseline(strategy::PolicyKind::kHonest);
  const auto m = strategy::evaluate(honest, env, RewardWeights{}, 10000, 17);
  CHECK(m.epochs >= 10000);
  CHECK(std::fabs(m.victim_loss) < 3.0 * m.victim_loss_se);
  CHECK(std::fabs(m.adversary_loss) < 3.0 * m.adversary_loss_se);
  CHECK(m.chain_quality_impact == 0.0);
  CHECK(std::fabs(m.mean_reward - 6.4) < 3.0 * m.se_reward);
}
