// Wall-clock comparison of the OpenMP kernels against their serial references.
// Usage: lstlab_bench [episodes] [trials]

#include "lstlab/monetize.hpp"
#include "lstlab/strategy.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

namespace {

double seconds(const std::function<void()>& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-28s serial %8.3f s  parallel %8.3f s  speedup %5.2fx  results %s\n", name, serial, parallel,
              serial / parallel, identical ? "identical" : "DIFFER");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace lstlab;
  const long episodes = argc > 1 ? std::atol(argv[1]) : 2000;
  const long trials = argc > 2 ? std::atol(argv[2]) : 1'000'000;
  std::printf("threads: %d\n", omp_get_max_threads());

  chain::EnvConfig env;
  env.stakes = {0.2, 0.2};
  env.episode_epochs = 6;
  auto policy = strategy::Policy::baseline(strategy::PolicyKind::kSelfishMixing);
  policy.stakes = env.stakes;
  const auto weights = reward::RewardWeights::self_optimization();

  std::vector<strategy::EpisodeResult> a, b;
  const double ts = seconds([&] { a = strategy::run_episodes_serial(policy, env, weights, episodes, 7); });
  const double tp = seconds([&] { b = strategy::run_episodes(policy, env, weights, episodes, 7); });
  bool same = a.size() == b.size();
  for (std::size_t i = 0; same && i < a.size(); ++i) {
    same = a[i].reward == b[i].reward && a[i].realized_slots == b[i].realized_slots;
  }
  report("run_episodes (SELFISH_MIXING)", ts, tp, same);

  monetize::ShortScenario s;
  s.beta_hat = 0.3587;
  s.sigma = 0.0073;
  s.set_slippage_bound(0.0005);
  monetize::ProfitDistribution x, y;
  const double ms = seconds([&] { x = monetize::simulate_serial(s, trials, 7); });
  const double mp = seconds([&] { y = monetize::simulate(s, trials, 7); });
  report("monetize::simulate", ms, mp, x.mean == y.mean && x.ecdf.size() == y.ecdf.size());
  return 0;
}
