#pragma once

// Observations, policies, episode rollouts, evaluation and training.

#include "lstlab/chain_env.hpp"
#include "lstlab/oracle.hpp"
#include "lstlab/reward.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace lstlab::strategy {

/// [branch, EA_prop, ET_prop, EA_skip, ET_skip, EA_fork, ET_fork] and, with MEV, [V_priv, V_pub, V_cur].
/// Oracle pairs that do not apply at the current decision point repeat the propose pair.
struct Observation {
  static constexpr std::size_t kBaseDims = 7;
  static constexpr std::size_t kMevDims = 10;

  std::vector<double> values;

  bool branch() const { return values.at(0) != 0.0; }
  std::size_t size() const { return values.size(); }
  bool has_mev() const { return values.size() == kMevDims; }
};

Observation observe(const chain::ChainState& state, bool mev_enabled);

enum class PolicyKind { kHonest, kSelfishMixing, kMixingForking, kLearned };

const char* kind_label(PolicyKind kind);
PolicyKind parse_kind(std::string_view label);

/// LEARNED policies score miss and hide/fork linearly over `learned_features`; propose scores 0.
/// The highest-scoring legal action wins; ties go to propose, then to the lower action index.
struct Policy {
  PolicyKind kind = PolicyKind::kHonest;
  beacon::StakeConfig stakes;
  reward::RewardWeights weights;
  chain::MevConfig mev;
  std::vector<double> parameters;

  static Policy baseline(PolicyKind kind);
  /// Learned parameters that reproduce HONEST.
  static Policy honest_learned(bool mev_features);
};

/// Affine transform of an observation used by LEARNED policies:
/// [1, branch, EA_prop - 32 aA, ET_prop - 32 aT, EA_skip - EA_prop, ET_skip - ET_prop,
///  EA_fork - EA_prop, ET_fork - ET_prop, exact] plus [V_priv, V_pub, V_cur] with MEV.
/// `exact` is 1 when an oracle pair departs from the stake-proportional estimate.
std::vector<double> learned_features(const Observation& obs, const beacon::StakeConfig& stakes);
std::size_t learned_feature_count(bool mev_features);
std::size_t learned_parameter_count(bool mev_features);

int act_learned(const std::vector<double>& parameters, const Observation& obs, const beacon::StakeConfig& stakes,
                const chain::ActionMask& mask);

/// Chooses an action at the current decision point. Baselines read the state; LEARNED reads `obs` only.
int act(const Policy& policy, const chain::ChainState& state, const Observation& obs, const chain::ActionMask& mask);

/// Totals over the acted epochs of one episode.
struct EpisodeResult {
  double reward = 0.0;
  long decisions = 0;
  long deviations = 0;  // decisions other than propose
  long epochs = 0;
  std::array<long, beacon::kGroupCount> realized_slots{};
  std::array<double, beacon::kGroupCount> canonical_value{};
  long sacrificed = 0;
  long displaced = 0;
  long displaced_target = 0;
  long slots = 0;
  double delta_value_adversary = 0.0;
  double delta_value_target = 0.0;
};

/// Receives one JSON object per trace line: header, decisions and final slot records.
using TraceSink = std::function<void(const nlohmann::json&)>;

EpisodeResult run_episode(const Policy& policy, const chain::EnvConfig& env, const reward::RewardWeights& weights,
                          std::uint64_t seed, const TraceSink& trace = {});

inline constexpr std::uint64_t kEvaluationStream = 0x6576616cULL;

std::uint64_t episode_seed(std::uint64_t root, std::uint64_t index);
/// Seed of the MEV arrival generator of the episode keyed by `seed`.
std::uint64_t mev_rng_seed(std::uint64_t seed);

/// Episodes [0, n) with seeds episode_seed(root, i). Parallel and serial variants return identical results.
std::vector<EpisodeResult> run_episodes(const Policy& policy, const chain::EnvConfig& env,
                                        const reward::RewardWeights& weights, long n, std::uint64_t root);
std::vector<EpisodeResult> run_episodes_serial(const Policy& policy, const chain::EnvConfig& env,
                                               const reward::RewardWeights& weights, long n, std::uint64_t root);

reward::AttackMetrics summarize(const std::vector<EpisodeResult>& episodes, const chain::EnvConfig& env);

reward::AttackMetrics evaluate(const Policy& policy, const chain::EnvConfig& env,
                               const reward::RewardWeights& weights, long n_episodes, std::uint64_t seed);
reward::AttackMetrics evaluate_serial(const Policy& policy, const chain::EnvConfig& env,
                                      const reward::RewardWeights& weights, long n_episodes, std::uint64_t seed);

nlohmann::json metrics_json(const reward::AttackMetrics& m);

/// Cross-entropy search over LEARNED parameters with common random numbers per generation.
struct TrainConfig {
  reward::RewardWeights weights;
  chain::EnvConfig env;
  long budget = 10'000'000;  // agent decisions across all training rollouts
  std::vector<std::uint64_t> seeds{1};
  int population = 32;
  int elite = 8;
  long episodes_per_candidate = 512;
  double init_sigma = 1.0;
  double min_sigma = 0.05;
  long validation_episodes = 4000;
  /// Per-decision penalty for non-propose actions; only separates otherwise equal candidates.
  double deviation_penalty = 1e-6;

  void validate() const;
};

struct TrainLogRecord {
  long iteration = 0;
  long steps = 0;
  double mean_reward = 0.0;   // distribution mean on this generation's episodes
  double elite_reward = 0.0;  // best candidate on this generation's episodes
  double victim_loss = 0.0;
  double adversary_loss = 0.0;
  double sigma = 0.0;
};

nlohmann::json log_record_json(const TrainLogRecord& r);

struct TrainResult {
  Policy policy;
  std::vector<TrainLogRecord> log;
  long steps = 0;
  double validation_reward = 0.0;
  double honest_validation_reward = 0.0;
  bool warning = false;
  std::string warning_message;
};

using TrainProgress = std::function<void(const TrainLogRecord&)>;

TrainResult train(const TrainConfig& cfg, const TrainProgress& progress = {});

/// Versioned key-value policy files.
void save_policy(const Policy& policy, const std::filesystem::path& path);
Policy load_policy(const std::filesystem::path& path);
std::string policy_to_string(const Policy& policy);
Policy policy_from_string(const std::string& text, const std::string& origin = "<string>");

/// Re-executes a recorded trace and checks every slot record against the recording.
struct ReplayReport {
  long decisions = 0;
  long slots_checked = 0;
  long mismatches = 0;
  std::vector<std::string> messages;
};

ReplayReport replay_trace(const std::vector<nlohmann::json>& lines);

}  // namespace lstlab::strategy
