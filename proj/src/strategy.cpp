#include "lstlab/strategy.hpp"

#include "lstlab/errors.hpp"
#include "lstlab/seeding.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>

namespace lstlab::strategy {

namespace {

using chain::ChainState;
using chain::DecisionKind;
using oracle::Hypothetical;

constexpr int kSlots = beacon::kSlotsPerEpoch;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::uint64_t kMevStream = 0x6d6576ULL;
constexpr std::uint64_t kGenerationStream = 0x67656eULL;
constexpr std::uint64_t kSamplerStream = 0x63656dULL;
constexpr std::uint64_t kValidationStream = 0x76616cULL;

oracle::TailObjective baseline_objective(const ChainState& s) {
  auto obj = oracle::TailObjective::adversary_net();
  obj.miss_cost = s.current_value();
  return obj;
}

int act_selfish_mixing(const ChainState& s) {
  if (s.decision() != DecisionKind::kProposal) return 1;
  const int t = oracle::pure_tail_length(s);
  if (t < 0 || t > oracle::kDefaultTailCap) return 1;
  const auto plan = oracle::enumerate_tail(s, baseline_objective(s));
  return plan.miss.front() ? 0 : 1;
}

/// Consecutive adversary slots starting at the current one.
int adversary_run(const ChainState& s) {
  int k = 0;
  while (s.slot + k < kSlots && s.schedule_current[s.slot + k] == beacon::Group::kAdversary) ++k;
  return k;
}

int act_mixing_forking(const ChainState& s, const chain::ActionMask& mask) {
  const double alpha = s.config.stakes.adversary;
  if (s.decision() == DecisionKind::kProposal) {
    if (oracle::pure_tail_length(s) >= 0) return act_selfish_mixing(s);
    const int k = adversary_run(s);
    // the run is followed by one competing block; the decision comes one slot after it
    if (chain::fork_feasible(alpha, static_cast<std::uint64_t>(k + 1), 1, s.config.boost)) return 2;
    return 1;
  }
  if (!mask.allows(2)) return 1;
  const int t = oracle::pure_tail_length(s);
  if (t < 0 || t > oracle::kDefaultTailCap) return 2;
  const auto obj = baseline_objective(s);
  const auto fork = oracle::enumerate_tail(s, obj, oracle::kDefaultTailCap, Hypothetical::kFork);
  auto regret = oracle::enumerate_tail(s, obj, oracle::kDefaultTailCap, Hypothetical::kPropose);
  for (const auto& b : s.branch.withheld) regret.objective -= b.value;
  return fork.objective >= regret.objective ? 2 : 1;
}

double dot(const double* w, const std::vector<double>& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += w[i] * f[i];
  return acc;
}

nlohmann::json trace_header(const Policy& policy, const chain::EnvConfig& env, std::uint64_t seed) {
  return nlohmann::json{{"type", "header"},
                        {"seed", seed},
                        {"policy", kind_label(policy.kind)},
                        {"stakes", {{"adversary", env.stakes.adversary}, {"target", env.stakes.target}}},
                        {"mev",
                         {{"enabled", env.mev.enabled},
                          {"arrival_prob", env.mev.arrival_prob},
                          {"bonus", env.mev.bonus},
                          {"capacity", env.mev.capacity}}},
                        {"boost", std::isinf(env.boost) ? nlohmann::json("inf") : nlohmann::json(env.boost)},
                        {"episode_epochs", env.episode_epochs},
                        {"hash", std::string(beacon::kHashName)}};
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

double deviation_or_nan(double realized, double stake) {
  return stake > 0.0 ? reward::relative_deviation(realized, stake, "group") : kNaN;
}

}  // namespace

Observation observe(const ChainState& s, bool mev_enabled) {
  Observation obs;
  obs.values.reserve(mev_enabled ? Observation::kMevDims : Observation::kBaseDims);
  const auto prop = oracle::counterfactual(s, Hypothetical::kPropose);
  OracleEstimate skip = prop;
  OracleEstimate fork = prop;
  if (s.decision() == DecisionKind::kProposal) {
    skip = oracle::counterfactual(s, Hypothetical::kSkip);
  } else if (chain::fork_feasible(s, s.config.boost)) {
    fork = oracle::counterfactual(s, Hypothetical::kFork);
  }
  obs.values = {s.branch.active ? 1.0 : 0.0, prop.adversary, prop.target, skip.adversary,
                skip.target, fork.adversary, fork.target};
  if (mev_enabled) {
    obs.values.push_back(s.branch.value_private);
    obs.values.push_back(s.branch.value_public);
    obs.values.push_back(s.current_value());
  }
  return obs;
}

const char* kind_label(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kHonest: return "HONEST";
    case PolicyKind::kSelfishMixing: return "SELFISH_MIXING";
    case PolicyKind::kMixingForking: return "MIXING_FORKING";
    case PolicyKind::kLearned: return "LEARNED";
  }
  return "?";
}

PolicyKind parse_kind(std::string_view label) {
  if (label == "HONEST") return PolicyKind::kHonest;
  if (label == "SELFISH_MIXING") return PolicyKind::kSelfishMixing;
  if (label == "MIXING_FORKING") return PolicyKind::kMixingForking;
  if (label == "LEARNED") return PolicyKind::kLearned;
  throw UsageError("unknown policy kind '" + std::string(label) + "'");
}

Policy Policy::baseline(PolicyKind kind) {
  if (kind == PolicyKind::kLearned) throw UsageError("LEARNED is not a baseline policy");
  Policy p;
  p.kind = kind;
  return p;
}

Policy Policy::honest_learned(bool mev_features) {
  Policy p;
  p.kind = PolicyKind::kLearned;
  p.mev.enabled = mev_features;
  const std::size_t f = learned_feature_count(mev_features);
  p.parameters.assign(2 * f, 0.0);
  p.parameters[0] = -1.0;  // miss bias
  p.parameters[f] = -1.0;  // hide/fork bias
  return p;
}

std::size_t learned_feature_count(bool mev_features) { return mev_features ? 12 : 9; }
std::size_t learned_parameter_count(bool mev_features) { return 2 * learned_feature_count(mev_features); }

std::vector<double> learned_features(const Observation& obs, const beacon::StakeConfig& stakes) {
  const auto& v = obs.values;
  if (v.size() != Observation::kBaseDims && v.size() != Observation::kMevDims) {
    throw UsageError("observation must have 7 or 10 components");
  }
  const double ea = kSlots * stakes.adversary;
  const double et = kSlots * stakes.target;
  bool exact = false;
  for (int i = 0; i < 3; ++i) {
    exact = exact || std::fabs(v[1 + 2 * i] - ea) > 1e-9 || std::fabs(v[2 + 2 * i] - et) > 1e-9;
  }
  std::vector<double> f{1.0,         v[0],        v[1] - ea,   v[2] - et, v[3] - v[1],
                        v[4] - v[2], v[5] - v[1], v[6] - v[2], exact ? 1.0 : 0.0};
  if (obs.has_mev()) f.insert(f.end(), v.begin() + 7, v.end());
  return f;
}

int act_learned(const std::vector<double>& parameters, const Observation& obs, const beacon::StakeConfig& stakes,
                const chain::ActionMask& mask) {
  const auto f = learned_features(obs, stakes);
  if (parameters.size() != 2 * f.size()) {
    throw UsageError("policy has " + std::to_string(parameters.size()) + " parameters, observation needs " +
                     std::to_string(2 * f.size()));
  }
  const std::array<double, 3> score{dot(parameters.data(), f), 0.0, dot(parameters.data() + f.size(), f)};
  int best = -1;
  for (int a : {1, 0, 2}) {
    if (!mask.allows(a)) continue;
    if (best < 0 || score[static_cast<std::size_t>(a)] > score[static_cast<std::size_t>(best)]) best = a;
  }
  if (best < 0) throw UsageError("action mask has no legal action");
  return best;
}

int act(const Policy& policy, const ChainState& state, const Observation& obs, const chain::ActionMask& mask) {
  int a = 1;
  switch (policy.kind) {
    case PolicyKind::kHonest: a = 1; break;
    case PolicyKind::kSelfishMixing: a = act_selfish_mixing(state); break;
    case PolicyKind::kMixingForking: a = act_mixing_forking(state, mask); break;
    case PolicyKind::kLearned: return act_learned(policy.parameters, obs, state.config.stakes, mask);
  }
  return mask.allows(a) ? a : 1;
}

EpisodeResult run_episode(const Policy& policy, const chain::EnvConfig& env, const reward::RewardWeights& weights,
                          std::uint64_t seed, const TraceSink& trace) {
  if (policy.kind == PolicyKind::kLearned && policy.mev.enabled != env.mev.enabled) {
    throw UsageError("learned policy MEV features do not match the environment");
  }
  EpisodeResult r;
  chain::Rng rng(mev_rng_seed(seed));
  if (trace) trace(trace_header(policy, env, seed));

  auto absorb_events = [&](const chain::SlotEvents& ev) {
    for (const auto& sum : ev.epochs) {
      r.reward += env.mev.enabled ? reward::epoch_reward_mev(weights, sum) : reward::epoch_reward(weights, sum);
      ++r.epochs;
      for (int g = 0; g < beacon::kGroupCount; ++g) {
        r.realized_slots[static_cast<std::size_t>(g)] += sum.realized_next[static_cast<std::size_t>(g)];
        r.canonical_value[static_cast<std::size_t>(g)] += sum.counters.canonical_value[static_cast<std::size_t>(g)];
      }
      r.sacrificed += sum.counters.sacrificed();
      r.displaced += sum.counters.displaced_total();
      r.displaced_target += sum.counters.displaced[1];
      r.slots += kSlots;
      r.delta_value_adversary += sum.counters.delta_value_adversary;
      r.delta_value_target += sum.counters.delta_value_target;
    }
    if (trace) {
      for (const auto& [epoch, records] : ev.closed_epochs) {
        for (int i = 0; i < kSlots; ++i) trace(chain::slot_record_json(epoch, i, records[static_cast<std::size_t>(i)]));
      }
    }
  };

  chain::SlotEvents initial;
  ChainState state = chain::reset(env, seed, rng, &initial);
  absorb_events(initial);
  while (!state.done) {
    const Observation obs = observe(state, env.mev.enabled);
    const chain::ActionMask mask = chain::legal_actions(state);
    const int a = act(policy, state, obs, mask);
    if (trace) {
      trace(nlohmann::json{{"type", "decision"},
                           {"epoch", state.epoch},
                           {"slot", state.slot},
                           {"kind", state.decision() == DecisionKind::kProposal ? "proposal" : "fork"},
                           {"observation", obs.values},
                           {"mask", {mask.legal[0], mask.legal[1], mask.legal[2]}},
                           {"action", a}});
    }
    ++r.decisions;
    if (a != 1) ++r.deviations;
    absorb_events(chain::step(state, static_cast<chain::Action>(a), rng));
  }
  return r;
}

std::uint64_t mev_rng_seed(std::uint64_t seed) { return derive_seed(seed, kMevStream, 0); }

std::uint64_t episode_seed(std::uint64_t root, std::uint64_t index) {
  return derive_seed(root, kEvaluationStream, index);
}

std::vector<EpisodeResult> run_episodes(const Policy& policy, const chain::EnvConfig& env,
                                        const reward::RewardWeights& weights, long n, std::uint64_t root) {
  std::vector<EpisodeResult> out(static_cast<std::size_t>(std::max(n, 0L)));
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 32)
  for (long i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = run_episode(policy, env, weights, episode_seed(root, static_cast<std::uint64_t>(i)));
    } catch (...) {
#pragma omp critical(lstlab_episode_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::vector<EpisodeResult> run_episodes_serial(const Policy& policy, const chain::EnvConfig& env,
                                               const reward::RewardWeights& weights, long n, std::uint64_t root) {
  std::vector<EpisodeResult> out;
  out.reserve(static_cast<std::size_t>(std::max(n, 0L)));
  for (long i = 0; i < n; ++i) {
    out.push_back(run_episode(policy, env, weights, episode_seed(root, static_cast<std::uint64_t>(i))));
  }
  return out;
}

reward::AttackMetrics summarize(const std::vector<EpisodeResult>& episodes, const chain::EnvConfig& env) {
  reward::AttackMetrics m;
  m.episodes = static_cast<long>(episodes.size());
  if (episodes.empty()) return m;

  std::vector<double> per_a;
  std::vector<double> per_t;
  std::vector<double> rewards;
  long sacrificed = 0;
  long displaced = 0;
  long slots = 0;
  std::array<double, beacon::kGroupCount> value{};
  for (const auto& e : episodes) {
    const double n = std::max<long>(e.epochs, 1);
    per_a.push_back(static_cast<double>(e.realized_slots[0]) / n);
    per_t.push_back(static_cast<double>(e.realized_slots[1]) / n);
    rewards.push_back(e.reward);
    m.epochs += e.epochs;
    sacrificed += e.sacrificed;
    displaced += e.displaced;
    slots += e.slots;
    for (std::size_t g = 0; g < value.size(); ++g) value[g] += e.canonical_value[g];
  }
  const auto& st = env.stakes;
  m.mean_adversary_slots = mean_of(per_a);
  m.mean_target_slots = mean_of(per_t);
  m.se_adversary_slots = standard_error(per_a);
  m.se_target_slots = standard_error(per_t);
  m.adversary_loss = deviation_or_nan(m.mean_adversary_slots, st.adversary);
  m.victim_loss = deviation_or_nan(m.mean_target_slots, st.target);
  m.adversary_loss_se = st.adversary > 0 ? m.se_adversary_slots / (kSlots * st.adversary) : kNaN;
  m.victim_loss_se = st.target > 0 ? m.se_target_slots / (kSlots * st.target) : kNaN;

  const auto cq = reward::chain_quality_impact(sacrificed, displaced, slots);
  m.sacrificed_fraction = cq.sacrificed;
  m.displaced_fraction = cq.displaced;
  m.chain_quality_impact = cq.total();

  const double canonical_blocks = static_cast<double>(slots - sacrificed - displaced);
  const double mean_block_value = canonical_blocks > 0 ? (value[0] + value[1] + value[2]) / canonical_blocks : 0.0;
  const double epochs = static_cast<double>(std::max<long>(m.epochs, 1));
  auto value_deviation = [&](double realized_total, double stake) {
    const double expected = kSlots * stake * mean_block_value;
    return expected > 0 ? realized_total / epochs / expected - 1.0 : kNaN;
  };
  m.adversary_value_gain = value_deviation(value[0], st.adversary);
  m.target_value_loss = value_deviation(value[1], st.target);

  m.mean_reward = mean_of(rewards);
  m.se_reward = standard_error(rewards);
  return m;
}

reward::AttackMetrics evaluate(const Policy& policy, const chain::EnvConfig& env,
                               const reward::RewardWeights& weights, long n_episodes, std::uint64_t seed) {
  if (n_episodes < 1) throw UsageError("n_episodes must be >= 1");
  return summarize(run_episodes(policy, env, weights, n_episodes, seed), env);
}

reward::AttackMetrics evaluate_serial(const Policy& policy, const chain::EnvConfig& env,
                                      const reward::RewardWeights& weights, long n_episodes, std::uint64_t seed) {
  if (n_episodes < 1) throw UsageError("n_episodes must be >= 1");
  return summarize(run_episodes_serial(policy, env, weights, n_episodes, seed), env);
}

nlohmann::json metrics_json(const reward::AttackMetrics& m) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return nlohmann::json{{"victim_loss", num(m.victim_loss)},
                        {"victim_loss_se", num(m.victim_loss_se)},
                        {"adversary_loss", num(m.adversary_loss)},
                        {"adversary_loss_se", num(m.adversary_loss_se)},
                        {"chain_quality_impact", m.chain_quality_impact},
                        {"sacrificed_fraction", m.sacrificed_fraction},
                        {"displaced_fraction", m.displaced_fraction},
                        {"mean_adversary_slots", m.mean_adversary_slots},
                        {"se_adversary_slots", m.se_adversary_slots},
                        {"mean_target_slots", m.mean_target_slots},
                        {"se_target_slots", m.se_target_slots},
                        {"adversary_block_share", m.mean_adversary_slots / kSlots},
                        {"adversary_value_gain", num(m.adversary_value_gain)},
                        {"target_value_loss", num(m.target_value_loss)},
                        {"mean_reward", m.mean_reward},
                        {"se_reward", m.se_reward},
                        {"episodes", m.episodes},
                        {"epochs", m.epochs}};
}

void TrainConfig::validate() const {
  weights.validate();
  env.validate();
  if (budget <= 0) throw UsageError("training budget must be > 0");
  if (seeds.empty()) throw UsageError("training needs at least one seed");
  if (population < 2) throw UsageError("population must be >= 2");
  if (elite < 1 || elite > population) throw UsageError("elite must lie in [1, population]");
  if (episodes_per_candidate < 1) throw UsageError("episodes_per_candidate must be >= 1");
  if (validation_episodes < 1) throw UsageError("validation_episodes must be >= 1");
  if (!(init_sigma > 0.0) || !(min_sigma >= 0.0)) throw UsageError("sigma settings must be positive");
  if (!(deviation_penalty >= 0.0)) throw UsageError("deviation_penalty must be >= 0");
}

nlohmann::json log_record_json(const TrainLogRecord& r) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return nlohmann::json{{"iteration", r.iteration},       {"steps", r.steps},
                        {"mean_reward", r.mean_reward},   {"elite_reward", r.elite_reward},
                        {"victim_loss", num(r.victim_loss)}, {"adversary_loss", num(r.adversary_loss)},
                        {"sigma", r.sigma}};
}

namespace {

struct CandidateScore {
  double score = 0.0;
  double reward = 0.0;
  long decisions = 0;
  std::array<long, 2> slots{};
  long epochs = 0;
};

/// Scores every candidate on the same episode seeds; candidate-major, deterministic under OpenMP.
std::vector<CandidateScore> score_candidates(const std::vector<Policy>& candidates, const TrainConfig& cfg,
                                             long episodes, std::uint64_t root) {
  const long n = static_cast<long>(candidates.size()) * episodes;
  std::vector<EpisodeResult> results(static_cast<std::size_t>(n));
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 32)
  for (long k = 0; k < n; ++k) {
    try {
      const auto& policy = candidates[static_cast<std::size_t>(k / episodes)];
      results[static_cast<std::size_t>(k)] =
          run_episode(policy, cfg.env, cfg.weights, episode_seed(root, static_cast<std::uint64_t>(k % episodes)));
    } catch (...) {
#pragma omp critical(lstlab_train_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  std::vector<CandidateScore> scores(candidates.size());
  for (long k = 0; k < n; ++k) {
    auto& s = scores[static_cast<std::size_t>(k / episodes)];
    const auto& e = results[static_cast<std::size_t>(k)];
    s.reward += e.reward;
    s.score += e.reward - cfg.deviation_penalty * static_cast<double>(e.deviations);
    s.decisions += e.decisions;
    s.slots[0] += e.realized_slots[0];
    s.slots[1] += e.realized_slots[1];
    s.epochs += e.epochs;
  }
  for (auto& s : scores) {
    s.reward /= static_cast<double>(episodes);
    s.score /= static_cast<double>(episodes);
  }
  return scores;
}

Policy learned_with(const TrainConfig& cfg, std::vector<double> params) {
  Policy p;
  p.kind = PolicyKind::kLearned;
  p.stakes = cfg.env.stakes;
  p.weights = cfg.weights;
  p.mev = cfg.env.mev;
  p.parameters = std::move(params);
  return p;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const TrainProgress& progress) {
  cfg.validate();
  TrainResult result;
  const bool mev = cfg.env.mev.enabled;
  const std::vector<double> honest = Policy::honest_learned(mev).parameters;
  const std::size_t dims = honest.size();

  std::vector<Policy> finalists{learned_with(cfg, honest)};
  const long restart_budget = std::max<long>(1, cfg.budget / static_cast<long>(cfg.seeds.size()));

  long iteration = 0;
  for (std::uint64_t seed : cfg.seeds) {
    std::mt19937_64 sampler(derive_seed(seed, kSamplerStream, 0));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> mu = honest;
    std::vector<double> sigma(dims, cfg.init_sigma);
    std::vector<double> best_params = mu;
    long used = 0;
    for (long gen = 0; used < restart_budget; ++gen) {
      std::vector<Policy> candidates;
      candidates.reserve(static_cast<std::size_t>(cfg.population) + 1);
      candidates.push_back(learned_with(cfg, mu));
      for (int j = 0; j < cfg.population; ++j) {
        std::vector<double> theta(dims);
        for (std::size_t d = 0; d < dims; ++d) theta[d] = mu[d] + sigma[d] * normal(sampler);
        candidates.push_back(learned_with(cfg, std::move(theta)));
      }
      const auto scores =
          score_candidates(candidates, cfg, cfg.episodes_per_candidate, derive_seed(seed, kGenerationStream, gen));
      for (const auto& s : scores) used += s.decisions;

      std::vector<std::size_t> order(candidates.size() - 1);
      std::iota(order.begin(), order.end(), std::size_t{1});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return scores[a].score > scores[b].score; });
      best_params = candidates[order.front()].parameters;

      std::vector<double> next_mu(dims, 0.0);
      std::vector<double> next_sigma(dims, 0.0);
      for (int e = 0; e < cfg.elite; ++e) {
        const auto& p = candidates[order[static_cast<std::size_t>(e)]].parameters;
        for (std::size_t d = 0; d < dims; ++d) next_mu[d] += p[d] / cfg.elite;
      }
      for (int e = 0; e < cfg.elite; ++e) {
        const auto& p = candidates[order[static_cast<std::size_t>(e)]].parameters;
        for (std::size_t d = 0; d < dims; ++d) next_sigma[d] += (p[d] - next_mu[d]) * (p[d] - next_mu[d]) / cfg.elite;
      }
      for (std::size_t d = 0; d < dims; ++d) next_sigma[d] = std::max(std::sqrt(next_sigma[d]), cfg.min_sigma);

      const auto& top = scores[order.front()];
      TrainLogRecord rec;
      rec.iteration = iteration++;
      rec.steps = result.steps + used;
      rec.mean_reward = scores[0].score;
      rec.elite_reward = top.score;
      const double epochs = static_cast<double>(std::max<long>(top.epochs, 1));
      rec.victim_loss = deviation_or_nan(static_cast<double>(top.slots[1]) / epochs, cfg.env.stakes.target);
      rec.adversary_loss = deviation_or_nan(static_cast<double>(top.slots[0]) / epochs, cfg.env.stakes.adversary);
      rec.sigma = mean_of(next_sigma);
      result.log.push_back(rec);
      if (progress) progress(rec);

      mu = std::move(next_mu);
      sigma = std::move(next_sigma);
    }
    result.steps += used;
    finalists.push_back(learned_with(cfg, mu));
    finalists.push_back(learned_with(cfg, best_params));
  }

  // Held-out selection; the honest initialization is first so it wins ties.
  const auto val = score_candidates(finalists, cfg, cfg.validation_episodes,
                                    derive_seed(cfg.seeds.front(), kValidationStream, 0));
  std::size_t chosen = 0;
  for (std::size_t i = 1; i < finalists.size(); ++i) {
    if (val[i].score > val[chosen].score) chosen = i;
  }
  result.policy = finalists[chosen];
  result.validation_reward = val[chosen].reward;
  result.honest_validation_reward = val[0].reward;
  if (chosen == 0) {
    result.warning = true;
    result.warning_message = "budget exhausted without improving on the honest initialization";
  }
  return result;
}

}  // namespace lstlab::strategy
