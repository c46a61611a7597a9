// lstlab command-line driver. Every experiment command reads a flat key=value config (plus --set
// overrides), echoes the effective settings next to its outputs and writes a JSON result record.
// Exit codes: 0 success, 2 usage, 3 data, 4 runtime.

#include "lstlab/beacon.hpp"
#include "lstlab/calibrate.hpp"
#include "lstlab/errors.hpp"
#include "lstlab/kv_config.hpp"
#include "lstlab/monetize.hpp"
#include "lstlab/strategy.hpp"
#include "settings.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace lstlab::cli {
namespace {

constexpr const char* kToolVersion = "lstlab 1.0.0";
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  int threads = 0;
  std::vector<std::string> overrides;
};

KeyValues load_settings(const GlobalOptions& g) {
  KeyValues kv;
  if (!g.config_path.empty()) kv = KeyValues::load(g.config_path);
  for (const auto& o : g.overrides) kv.merge(KeyValues::parse(o, "--set"));
  return kv;
}

std::uint64_t require_seed(const GlobalOptions& g, const std::string& command) {
  if (!g.seed) throw UsageError(command + " requires --seed");
  return *g.seed;
}

fs::path out_path(const GlobalOptions& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / name;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Deterministic id: command plus a digest of the effective config and seed.
std::string experiment_id(const std::string& command, const KeyValues& effective, std::optional<std::uint64_t> seed) {
  std::string text = command + "\n" + effective.to_string() + "seed = " + (seed ? std::to_string(*seed) : "none");
  const auto d = beacon::sha256({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  static const char* hex = "0123456789abcdef";
  std::string id = command + "-";
  for (int i = 0; i < 8; ++i) {
    id += hex[d[static_cast<std::size_t>(i)] >> 4];
    id += hex[d[static_cast<std::size_t>(i)] & 15];
  }
  return id;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

/// Writes the config echo and the result record; `extra` adds top-level fields.
void finish(const GlobalOptions& g, const std::string& command, const Settings& settings, json metrics,
            json extra = json::object()) {
  settings.effective().save(out_path(g, command + "_config.cfg"));
  json config = json::object();
  for (const auto& [k, v] : settings.effective().entries()) config[k] = v;
  json record{{"experiment", experiment_id(command, settings.effective(), g.seed)},
              {"command", command},
              {"timestamp", utc_timestamp()},
              {"tool_version", kToolVersion},
              {"hash", std::string(beacon::kHashName)},
              {"seed", g.seed ? json(*g.seed) : json(nullptr)},
              {"config", config},
              {"metrics", std::move(metrics)}};
  for (auto& [k, v] : extra.items()) record[k] = v;
  write_text(out_path(g, command + "_record.json"), record.dump(2) + "\n");
}

int percent(double share) { return static_cast<int>(std::lround(share * 100.0)); }

// ---- experiment settings shared by train / evaluate / grid / mev-sweep ----

reward::RewardWeights read_weights(Settings& s) {
  const std::string objective = s.text("objective", "self_optimization");
  reward::RewardWeights w;
  if (objective == "self_optimization") {
    w = reward::RewardWeights::self_optimization();
  } else if (objective == "griefing") {
    w = reward::RewardWeights::griefing();
  } else if (objective != "custom") {
    throw UsageError("objective must be self_optimization, griefing or custom, got '" + objective + "'");
  }
  w.beta = s.real("weights.beta", w.beta);
  w.omega = s.real("weights.omega", w.omega);
  w.gamma = s.real("weights.gamma", w.gamma);
  w.validate();
  return w;
}

chain::MevConfig read_mev(Settings& s) {
  chain::MevConfig m;
  m.enabled = s.flag("mev.enabled", false);
  m.arrival_prob = s.real("mev.arrival_prob", m.enabled ? 0.1 : 0.0);
  m.bonus = s.real("mev.bonus", m.enabled ? 5.0 : 0.0);
  m.capacity = static_cast<int>(s.integer("mev.capacity", 3));
  m.validate();
  return m;
}

beacon::StakeConfig read_stakes(Settings& s, const beacon::StakeConfig* fallback = nullptr) {
  beacon::StakeConfig st;
  st.adversary = fallback ? s.real("stakes.adversary", fallback->adversary) : s.real("stakes.adversary");
  st.target = fallback ? s.real("stakes.target", fallback->target) : s.real("stakes.target");
  st.validate();
  return st;
}

/// Evaluation environment around the given stakes.
chain::EnvConfig read_env(Settings& s, const beacon::StakeConfig& stakes) {
  chain::EnvConfig env;
  env.stakes = stakes;
  env.boost = s.real("boost", 0.4);
  env.episode_epochs = static_cast<int>(s.integer("episode_epochs", 6));
  env.mev = read_mev(s);
  env.validate();
  return env;
}

strategy::TrainConfig read_train(Settings& s, const chain::EnvConfig& eval_env, const reward::RewardWeights& w,
                                 std::uint64_t seed) {
  strategy::TrainConfig cfg;
  cfg.weights = w;
  cfg.env = eval_env;
  cfg.env.episode_epochs = static_cast<int>(s.integer("train.episode_epochs", 2));
  cfg.budget = s.integer("train.budget", cfg.budget);
  cfg.population = static_cast<int>(s.integer("train.population", cfg.population));
  cfg.elite = static_cast<int>(s.integer("train.elite", cfg.elite));
  cfg.episodes_per_candidate = s.integer("train.episodes_per_candidate", cfg.episodes_per_candidate);
  cfg.init_sigma = s.real("train.init_sigma", cfg.init_sigma);
  cfg.min_sigma = s.real("train.min_sigma", cfg.min_sigma);
  cfg.validation_episodes = s.integer("train.validation_episodes", cfg.validation_episodes);
  cfg.deviation_penalty = s.real("train.deviation_penalty", cfg.deviation_penalty);
  const long restarts = s.integer("train.restarts", 1);
  if (restarts < 1) throw UsageError("train.restarts must be >= 1");
  cfg.seeds.clear();
  for (long k = 0; k < restarts; ++k) cfg.seeds.push_back(seed + static_cast<std::uint64_t>(k));
  cfg.validate();
  return cfg;
}

std::string objective_label(const reward::RewardWeights& w) {
  const auto same = [](const reward::RewardWeights& a, const reward::RewardWeights& b) {
    return a.beta == b.beta && a.omega == b.omega && a.gamma == b.gamma;
  };
  if (same(w, reward::RewardWeights::self_optimization())) return "self_optimization";
  if (same(w, reward::RewardWeights::griefing())) return "griefing";
  return "custom";
}

std::string cell_policy_name(const beacon::StakeConfig& st) {
  return "policy_a" + std::to_string(percent(st.adversary)) + "_t" + std::to_string(percent(st.target)) + ".cfg";
}

std::string mev_policy_name(const chain::MevConfig& m, const std::string& objective) {
  return "policy_d" + std::to_string(percent(m.arrival_prob)) + "_f" + format_double(m.bonus) + "_" + objective +
         ".cfg";
}

std::string default_policy_name(const chain::EnvConfig& env, const reward::RewardWeights& w) {
  return env.mev.enabled ? mev_policy_name(env.mev, objective_label(w)) : cell_policy_name(env.stakes);
}

json policy_json(const strategy::Policy& p) {
  json j{{"kind", strategy::kind_label(p.kind)}};
  if (p.kind == strategy::PolicyKind::kMixingForking) j["note"] = "heuristic approximation of forking attacks";
  return j;
}

/// Trains with progress lines on stderr and the per-generation log appended to `log`.
strategy::TrainResult train_logged(const strategy::TrainConfig& cfg, std::ostream* log, const std::string& tag) {
  auto result = strategy::train(cfg, [&](const strategy::TrainLogRecord& r) {
    if (log != nullptr) *log << strategy::log_record_json(r).dump() << '\n';
  });
  std::cerr << tag << ": validation reward " << format_double(result.validation_reward) << " (honest "
            << format_double(result.honest_validation_reward) << ")\n";
  if (result.warning) std::cerr << tag << ": warning: " << result.warning_message << '\n';
  return result;
}

json flat_metrics(const reward::AttackMetrics& m) { return strategy::metrics_json(m); }

// ---- commands ----

int cmd_train(const GlobalOptions& g, const std::string& policy_name) {
  const auto seed = require_seed(g, "train");
  Settings s(load_settings(g));
  const auto weights = read_weights(s);
  const auto env = read_env(s, read_stakes(s));
  const auto cfg = read_train(s, env, weights, seed);
  s.tolerate("eval.");
  s.reject_unknown();

  const auto name = policy_name.empty() ? default_policy_name(env, weights) : policy_name;
  std::ofstream log(out_path(g, "train_log.jsonl"));
  if (!log) throw std::runtime_error("cannot write training log");
  const auto result = train_logged(cfg, &log, "train");
  strategy::save_policy(result.policy, out_path(g, name));

  json metrics{{"validation_reward", result.validation_reward},
               {"honest_validation_reward", result.honest_validation_reward},
               {"steps", result.steps},
               {"iterations", static_cast<long>(result.log.size())},
               {"warning", result.warning}};
  json extra{{"policy_file", name}};
  if (result.warning) extra["warning_message"] = result.warning_message;
  finish(g, "train", s, metrics, extra);
  std::cout << (fs::path(g.out_dir) / name).string() << '\n';
  return 0;
}

int cmd_evaluate(const GlobalOptions& g, const std::string& policy_file, long trace_episodes) {
  const auto seed = require_seed(g, "evaluate");
  Settings s(load_settings(g));
  std::optional<strategy::Policy> loaded;
  if (!policy_file.empty()) loaded = strategy::load_policy(policy_file);
  const std::string kind = s.text("policy.kind", loaded ? strategy::kind_label(loaded->kind) : "HONEST");
  const auto weights = read_weights(s);
  const auto env = read_env(s, read_stakes(s, loaded ? &loaded->stakes : nullptr));
  const long episodes = s.integer("eval.episodes", 10000);
  s.tolerate("train.");
  s.reject_unknown();
  if (episodes < 1) throw UsageError("eval.episodes must be >= 1");

  strategy::Policy policy;
  if (loaded) {
    if (strategy::parse_kind(kind) != loaded->kind) throw UsageError("policy.kind disagrees with the policy file");
    policy = *loaded;
  } else {
    const auto k = strategy::parse_kind(kind);
    if (k == strategy::PolicyKind::kLearned) throw UsageError("a LEARNED policy needs --policy FILE");
    policy = strategy::Policy::baseline(k);
    policy.stakes = env.stakes;
    policy.weights = weights;
    policy.mev = env.mev;
  }

  if (trace_episodes > 0) {
    std::ofstream trace(out_path(g, "trace.jsonl"));
    if (!trace) throw std::runtime_error("cannot write trace");
    const strategy::TraceSink sink = [&](const json& line) { trace << line.dump() << '\n'; };
    for (long i = 0; i < trace_episodes; ++i) {
      strategy::run_episode(policy, env, weights, strategy::episode_seed(seed, static_cast<std::uint64_t>(i)), sink);
    }
  }
  const auto m = strategy::evaluate(policy, env, weights, episodes, seed);
  finish(g, "evaluate", s, flat_metrics(m), json{{"policy", policy_json(policy)}});
  std::cout << flat_metrics(m).dump(2) << '\n';
  return 0;
}

int cmd_grid(const GlobalOptions& g, bool train_inline) {
  const auto seed = require_seed(g, "grid");
  Settings s(load_settings(g));
  const auto weights = read_weights(s);
  const auto adv = s.reals("grid.adversary_stakes", {0.05, 0.10, 0.15, 0.20, 0.25, 0.30});
  const auto tgt = s.reals("grid.target_stakes", {0.05, 0.10, 0.15, 0.20, 0.25, 0.30});
  const std::string policy_dir = s.text("grid.policy_dir", "policies");
  const long episodes = s.integer("eval.episodes", 10000);
  // Each cell overrides these placeholder stakes.
  const auto base = read_env(s, beacon::StakeConfig{0.2, 0.2});
  const auto base_train = read_train(s, base, weights, seed);
  s.reject_unknown();
  if (adv.empty() || tgt.empty()) throw UsageError("grid stake lists must not be empty");

  std::vector<std::string> missing;
  if (!train_inline) {
    for (double a : adv) {
      for (double t : tgt) {
        const auto p = fs::path(policy_dir) / cell_policy_name({a, t});
        if (!fs::exists(p)) missing.push_back(p.string());
      }
    }
    if (!missing.empty()) {
      std::string list;
      for (const auto& m : missing) list += "\n  " + m;
      throw DataError("missing policies for " + std::to_string(missing.size()) + " grid cells:" + list);
    }
  }

  std::ofstream csv(out_path(g, "grid.csv"));
  if (!csv) throw std::runtime_error("cannot write grid.csv");
  csv << "alpha_a,alpha_t,victim_loss,adversary_loss,chain_quality\n";
  std::ofstream log;
  if (train_inline) {
    fs::create_directories(out_path(g, "policies"));
    log.open(out_path(g, "train_log.jsonl"));
  }
  json cells = json::array();
  long asymmetric = 0;
  for (double a : adv) {
    for (double t : tgt) {
      auto env = base;
      env.stakes = {a, t};
      env.stakes.validate();
      const auto name = cell_policy_name(env.stakes);
      strategy::Policy policy;
      if (train_inline) {
        auto cfg = base_train;
        cfg.env.stakes = env.stakes;
        policy = train_logged(cfg, &log, name).policy;
        strategy::save_policy(policy, fs::path(g.out_dir) / "policies" / name);
      } else {
        policy = strategy::load_policy(fs::path(policy_dir) / name);
      }
      const auto m = strategy::evaluate(policy, env, weights, episodes, seed);
      csv << format_double(a) << ',' << format_double(t) << ',' << format_double(m.victim_loss) << ','
          << format_double(m.adversary_loss) << ',' << format_double(m.chain_quality_impact) << '\n';
      asymmetric += std::fabs(m.victim_loss) >= std::fabs(m.adversary_loss);
      auto cell = flat_metrics(m);
      cell["alpha_a"] = a;
      cell["alpha_t"] = t;
      cells.push_back(cell);
    }
  }
  const double cells_n = static_cast<double>(adv.size() * tgt.size());
  finish(g, "grid", s, json{{"cells", cells.size()}, {"asymmetric_fraction", asymmetric / cells_n}},
         json{{"cells", cells}});
  return 0;
}

int cmd_mev_sweep(const GlobalOptions& g, bool train_inline) {
  const auto seed = require_seed(g, "mev-sweep");
  Settings s(load_settings(g));
  const auto arrivals = s.reals("sweep.arrival_probs", {0.05, 0.10, 0.15, 0.20});
  const auto bonuses = s.reals("sweep.bonuses", {1.0, 2.0, 5.0, 10.0});
  const std::string policy_dir = s.text("sweep.policy_dir", "policies");
  const long episodes = s.integer("eval.episodes", 10000);
  const auto base = read_env(s, read_stakes(s));
  if (!base.mev.enabled) throw UsageError("mev-sweep requires mev.enabled = true");
  const auto base_train = read_train(s, base, reward::RewardWeights::self_optimization(), seed);
  s.reject_unknown();

  const std::vector<std::pair<std::string, reward::RewardWeights>> objectives{
      {"self_optimization", reward::RewardWeights::self_optimization()},
      {"griefing", reward::RewardWeights::griefing()}};

  if (!train_inline) {
    std::string list;
    long n_missing = 0;
    for (double d : arrivals) {
      for (double f : bonuses) {
        for (const auto& [label, w] : objectives) {
          const auto p = fs::path(policy_dir) / mev_policy_name({true, d, f, base.mev.capacity}, label);
          if (!fs::exists(p)) {
            list += "\n  " + p.string();
            ++n_missing;
          }
        }
      }
    }
    if (n_missing > 0) throw DataError("missing policies for " + std::to_string(n_missing) + " sweep cells:" + list);
  }

  std::ofstream csv(out_path(g, "mev_sweep.csv"));
  if (!csv) throw std::runtime_error("cannot write mev_sweep.csv");
  csv << "arrival_prob,bonus,objective,sacrificed_fraction,displaced_fraction,chain_quality,adversary_value_gain,"
         "target_value_loss,victim_loss,adversary_loss\n";
  std::ofstream log;
  if (train_inline) {
    fs::create_directories(out_path(g, "policies"));
    log.open(out_path(g, "train_log.jsonl"));
  }
  auto field = [](double v) { return std::isfinite(v) ? format_double(v) : std::string(); };
  json rows = json::array();
  for (double d : arrivals) {
    for (double f : bonuses) {
      for (const auto& [label, w] : objectives) {
        auto env = base;
        env.mev.arrival_prob = d;
        env.mev.bonus = f;
        env.mev.validate();
        const auto name = mev_policy_name(env.mev, label);
        strategy::Policy policy;
        if (train_inline) {
          auto cfg = base_train;
          cfg.env.mev = env.mev;
          cfg.weights = w;
          policy = train_logged(cfg, &log, name).policy;
          strategy::save_policy(policy, fs::path(g.out_dir) / "policies" / name);
        } else {
          policy = strategy::load_policy(fs::path(policy_dir) / name);
        }
        const auto m = strategy::evaluate(policy, env, w, episodes, seed);
        csv << format_double(d) << ',' << format_double(f) << ',' << label << ',' << field(m.sacrificed_fraction)
            << ',' << field(m.displaced_fraction) << ',' << field(m.chain_quality_impact) << ','
            << field(m.adversary_value_gain) << ',' << field(m.target_value_loss) << ',' << field(m.victim_loss)
            << ',' << field(m.adversary_loss) << '\n';
        auto row = flat_metrics(m);
        row["arrival_prob"] = d;
        row["bonus"] = f;
        row["objective"] = label;
        rows.push_back(row);
      }
    }
  }
  finish(g, "mev-sweep", s, json{{"rows", rows.size()}}, json{{"rows", rows}});
  return 0;
}

const std::vector<std::string> kScenarioKeys{"collateral_eth", "ltv",          "rounds",         "horizon_days",
                                             "beta_hat",       "sigma_h",      "degradation_apr", "borrow_rate",
                                             "holding_days",   "slippage_bound", "slippage_sell", "slippage_buy",
                                             "liq_threshold"};

int cmd_monetize(const GlobalOptions& g, bool with_break_even) {
  const auto seed = require_seed(g, "monetize");
  Settings s(load_settings(g));
  const auto scenario = monetize::scenario_from_kv(s.take(kScenarioKeys));
  KeyValues scenario_echo;
  monetize::scenario_to_kv(scenario, scenario_echo);
  s.echo(scenario_echo);
  const long trials = s.integer("trials", 10000);
  const double apr = s.real("honest_apr", 0.03);
  monetize::BreakEvenOptions be;
  be.lower = s.real("break_even.lower", be.lower);
  be.upper = s.real("break_even.upper", be.upper);
  be.tolerance = s.real("break_even.tolerance", be.tolerance);
  be.trials = s.integer("break_even.trials", trials);
  be.seed = seed;
  s.reject_unknown();

  const auto dist = monetize::simulate(scenario, trials, seed);
  monetize::write_ecdf_csv(dist, out_path(g, "ecdf.csv"));
  const double benchmark = monetize::honest_benchmark(scenario.collateral, apr, scenario.holding_days);
  json metrics = monetize::summary_json(dist);
  metrics["short_exposure_eth"] = monetize::short_exposure(scenario.collateral, scenario.ltv, scenario.rounds);
  metrics["analytic_expected_profit_eth"] = monetize::analytic_expected_profit(scenario);
  metrics["honest_benchmark_eth"] = benchmark;
  if (with_break_even) metrics["break_even_degradation"] = monetize::break_even(scenario, benchmark, be);
  finish(g, "monetize", s, metrics);
  std::cout << metrics.dump(2) << '\n';
  return 0;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

int cmd_calibrate(const GlobalOptions& g) {
  Settings s(load_settings(g));
  const auto pools = split_names(s.text("pools"));
  const std::string eth = s.text("eth_prices");
  const auto horizons = s.reals("horizons", {60, 90, 180});
  const int lag = static_cast<int>(s.integer("lag", -1));
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& p : pools) files.emplace_back(s.text("pool." + p + ".prices"), s.text("pool." + p + ".apr"));
  s.reject_unknown();
  if (pools.empty()) throw UsageError("pools must name at least one pool");

  std::ofstream csv(out_path(g, "calibration.csv"));
  if (!csv) throw std::runtime_error("cannot write calibration.csv");
  csv << calibrate::calibration_csv_header() << '\n';
  json rows = json::array();
  for (std::size_t i = 0; i < pools.size(); ++i) {
    for (double h : horizons) {
      if (h != std::floor(h) || h < 1) throw UsageError("horizons must be positive integers");
      const auto r = calibrate::calibrate_pool(files[i].first, eth, files[i].second, static_cast<int>(h), lag,
                                               pools[i]);
      csv << calibrate::calibration_csv_row(r) << '\n';
      rows.push_back(calibrate::calibration_json(r));
    }
  }
  finish(g, "calibrate", s, json{{"rows", rows.size()}}, json{{"results", rows}});
  return 0;
}

int cmd_replay(const GlobalOptions& g, const std::string& trace_file) {
  std::ifstream in(trace_file);
  if (!in) throw DataError("cannot open trace " + trace_file);
  std::vector<json> lines;
  long n = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
    if (line.empty()) continue;
    try {
      lines.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw DataError(trace_file + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  // A trace holds one or more episodes, each opened by a header line.
  strategy::ReplayReport report;
  long episodes = 0;
  for (std::size_t begin = 0; begin < lines.size();) {
    std::size_t end = begin + 1;
    while (end < lines.size() && lines[end].value("type", "") != "header") ++end;
    const auto part = strategy::replay_trace(std::vector<json>(lines.begin() + static_cast<long>(begin),
                                                               lines.begin() + static_cast<long>(end)));
    report.decisions += part.decisions;
    report.slots_checked += part.slots_checked;
    report.mismatches += part.mismatches;
    for (const auto& m : part.messages) report.messages.push_back("episode " + std::to_string(episodes) + ": " + m);
    ++episodes;
    begin = end;
  }
  json j{{"trace", trace_file},
         {"episodes", episodes},
         {"decisions", report.decisions},
         {"slots_checked", report.slots_checked},
         {"mismatches", report.mismatches},
         {"messages", report.messages}};
  write_text(out_path(g, "replay_report.json"), j.dump(2) + "\n");
  std::cout << j.dump(2) << '\n';
  if (report.mismatches > 0) throw DataError(std::to_string(report.mismatches) + " replay mismatches");
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Beacon manipulation simulator, attack trainer and liquid-staking short analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  GlobalOptions g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Root seed (mandatory for experiment commands)");
  app.add_option("--config", g.config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--out-dir", g.out_dir, "Directory for outputs")->capture_default_str();
  app.add_option("--threads", g.threads, "OpenMP worker threads (0 keeps the runtime default)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--set", g.overrides, "Override one config entry, e.g. --set eval.episodes=100");

  std::string policy_name;
  auto* train = app.add_subcommand("train", "Train a LEARNED policy");
  train->add_option("--policy-name", policy_name, "Output policy file name");

  std::string policy_file;
  long trace_episodes = 0;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a baseline or a saved policy");
  evaluate->add_option("--policy", policy_file, "Policy file")->check(CLI::ExistingFile);
  evaluate->add_option("--trace-episodes", trace_episodes, "Write traces of the first N episodes")
      ->check(CLI::NonNegativeNumber);

  bool grid_inline = false;
  auto* grid = app.add_subcommand("grid", "Evaluate the stake grid");
  grid->add_flag("--train-inline", grid_inline, "Train every cell instead of loading policies");

  bool sweep_inline = false;
  auto* sweep = app.add_subcommand("mev-sweep", "Sweep MEV arrival probability and bonus");
  sweep->add_flag("--train-inline", sweep_inline, "Train every cell instead of loading policies");

  bool with_break_even = false;
  auto* monetize = app.add_subcommand("monetize", "Monte Carlo profit distribution of the leveraged short");
  monetize->add_flag("--break-even", with_break_even, "Also solve for the break-even degradation");

  auto* calibrate = app.add_subcommand("calibrate", "Regress forward LST returns on APR");

  std::string trace_file;
  auto* replay = app.add_subcommand("replay-trace", "Re-execute a recorded trace and compare");
  replay->add_option("trace", trace_file, "Trace JSONL file")->required()->check(CLI::ExistingFile);

  for (auto* sub : {train, evaluate, grid, sweep, monetize, calibrate, replay}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  if (seed_opt->count() > 0) g.seed = seed_value;
  if (g.threads > 0) omp_set_num_threads(g.threads);

  if (train->parsed()) return cmd_train(g, policy_name);
  if (evaluate->parsed()) return cmd_evaluate(g, policy_file, trace_episodes);
  if (grid->parsed()) return cmd_grid(g, grid_inline);
  if (sweep->parsed()) return cmd_mev_sweep(g, sweep_inline);
  if (monetize->parsed()) return cmd_monetize(g, with_break_even);
  if (calibrate->parsed()) return cmd_calibrate(g);
  return cmd_replay(g, trace_file);
}

}  // namespace
}  // namespace lstlab::cli

int main(int argc, char** argv) {
  try {
    return lstlab::cli::run(argc, argv);
  } catch (const lstlab::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return lstlab::cli::kExitUsage;
  } catch (const lstlab::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return lstlab::cli::kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return lstlab::cli::kExitRuntime;
  }
}
