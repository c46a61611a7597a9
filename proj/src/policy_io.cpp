#include "lstlab/errors.hpp"
#include "lstlab/kv_config.hpp"
#include "lstlab/strategy.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <map>

namespace lstlab::strategy {

namespace {

constexpr long kPolicyFormatVersion = 1;

}  // namespace

std::string policy_to_string(const Policy& p) {
  KeyValues kv;
  kv.set("format_version", kPolicyFormatVersion);
  kv.set("kind", kind_label(p.kind));
  kv.set("stakes.adversary", p.stakes.adversary);
  kv.set("stakes.target", p.stakes.target);
  kv.set("weights.beta", p.weights.beta);
  kv.set("weights.omega", p.weights.omega);
  kv.set("weights.gamma", p.weights.gamma);
  kv.set("mev.enabled", p.mev.enabled);
  kv.set("mev.arrival_prob", p.mev.arrival_prob);
  kv.set("mev.bonus", p.mev.bonus);
  kv.set("mev.capacity", static_cast<long>(p.mev.capacity));
  kv.set("parameters", join_doubles(p.parameters));
  return "# lstlab policy\n" + kv.to_string();
}

Policy policy_from_string(const std::string& text, const std::string& origin) {
  const KeyValues kv = KeyValues::parse(text, origin);
  const long version = kv.get_long("format_version");
  if (version != kPolicyFormatVersion) {
    throw DataError(origin + ": unsupported policy format_version " + std::to_string(version));
  }
  Policy p;
  p.kind = parse_kind(kv.get_string("kind"));
  p.stakes.adversary = kv.get_double("stakes.adversary");
  p.stakes.target = kv.get_double("stakes.target");
  p.weights.beta = kv.get_double("weights.beta");
  p.weights.omega = kv.get_double("weights.omega");
  p.weights.gamma = kv.get_double("weights.gamma");
  p.mev.enabled = kv.get_bool("mev.enabled");
  p.mev.arrival_prob = kv.get_double("mev.arrival_prob");
  p.mev.bonus = kv.get_double("mev.bonus");
  p.mev.capacity = static_cast<int>(kv.get_long("mev.capacity"));
  p.parameters = kv.get_doubles("parameters");
  if (p.kind == PolicyKind::kLearned && p.parameters.size() != learned_parameter_count(p.mev.enabled)) {
    throw DataError(origin + ": LEARNED policy needs " + std::to_string(learned_parameter_count(p.mev.enabled)) +
                    " parameters, found " + std::to_string(p.parameters.size()));
  }
  return p;
}

void save_policy(const Policy& policy, const std::filesystem::path& path) {
  KeyValues::parse(policy_to_string(policy)).save(path);
}

Policy load_policy(const std::filesystem::path& path) {
  const KeyValues kv = KeyValues::load(path);
  return policy_from_string(kv.to_string(), path.string());
}

ReplayReport replay_trace(const std::vector<nlohmann::json>& lines) {
  if (lines.empty() || lines.front().value("type", "") != "header") {
    throw DataError("trace must start with a header line");
  }
  const auto& h = lines.front();
  chain::EnvConfig env;
  try {
    env.stakes.adversary = h.at("stakes").at("adversary").get<double>();
    env.stakes.target = h.at("stakes").at("target").get<double>();
    env.mev.enabled = h.at("mev").at("enabled").get<bool>();
    env.mev.arrival_prob = h.at("mev").at("arrival_prob").get<double>();
    env.mev.bonus = h.at("mev").at("bonus").get<double>();
    env.mev.capacity = h.at("mev").at("capacity").get<int>();
    const auto& boost = h.at("boost");
    env.boost = boost.is_string() ? std::numeric_limits<double>::infinity() : boost.get<double>();
    env.episode_epochs = h.at("episode_epochs").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed trace header: ") + e.what());
  }
  const auto seed = h.at("seed").get<std::uint64_t>();

  std::vector<const nlohmann::json*> decisions;
  std::map<std::pair<std::uint64_t, int>, const nlohmann::json*> recorded;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto type = lines[i].value("type", "");
    if (type == "decision") {
      decisions.push_back(&lines[i]);
    } else if (type == "slot") {
      recorded[{lines[i].at("epoch").get<std::uint64_t>(), lines[i].at("slot").get<int>()}] = &lines[i];
    } else {
      throw DataError("trace line " + std::to_string(i + 1) + " has unknown type '" + type + "'");
    }
  }

  ReplayReport report;
  auto check_events = [&](const chain::SlotEvents& ev) {
    for (const auto& [epoch, records] : ev.closed_epochs) {
      for (int s = 0; s < beacon::kSlotsPerEpoch; ++s) {
        const auto expected = chain::slot_record_json(epoch, s, records[static_cast<std::size_t>(s)]);
        const auto it = recorded.find({epoch, s});
        ++report.slots_checked;
        if (it == recorded.end() || *it->second != expected) {
          ++report.mismatches;
          report.messages.push_back("slot record differs at epoch " + std::to_string(epoch) + " slot " +
                                    std::to_string(s));
        }
      }
    }
  };

  chain::Rng rng(mev_rng_seed(seed));
  chain::SlotEvents initial;
  chain::ChainState state = chain::reset(env, seed, rng, &initial);
  check_events(initial);
  for (const auto* d : decisions) {
    if (state.done) {
      ++report.mismatches;
      report.messages.push_back("trace has decisions after the episode ended");
      break;
    }
    const auto epoch = d->at("epoch").get<std::uint64_t>();
    const auto slot = d->at("slot").get<int>();
    if (epoch != state.epoch || slot != state.slot) {
      ++report.mismatches;
      report.messages.push_back("decision at epoch " + std::to_string(epoch) + " slot " + std::to_string(slot) +
                                " but replay is at epoch " + std::to_string(state.epoch) + " slot " +
                                std::to_string(state.slot));
      break;
    }
    ++report.decisions;
    check_events(chain::step(state, static_cast<chain::Action>(d->at("action").get<int>()), rng));
  }
  if (!state.done && report.mismatches == 0) {
    ++report.mismatches;
    report.messages.push_back("trace ended before the episode finished");
  }
  return report;
}

}  // namespace lstlab::strategy
