#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "trackwall/analytics.hpp"
#include "trackwall/gateway.hpp"
#include "trackwall/replay.hpp"

using namespace trackwall;

static const std::vector<BrowsingEvent>& replay_events() {
  static const std::vector<BrowsingEvent> events = [] {
    const auto& r = bench_resources();
    PolicyStore policy(r.taxonomy);
    policy.set_category_blocked("adult", true);
    TrackerRegistry registry;
    Gateway gateway(r, policy, registry);
    return replay_file(gateway, std::string(TRACKWALL_SOURCE_DIR) + "/tests/data/synthetic_log.jsonl")
        .events;
  }();
  return events;
}

static void BM_Replay(benchmark::State& state) {
  const auto& r = bench_resources();
  const std::string path = std::string(TRACKWALL_SOURCE_DIR) + "/tests/data/synthetic_log.jsonl";
  for (auto _ : state) {
    PolicyStore policy(r.taxonomy);
    TrackerRegistry registry;
    Gateway gateway(r, policy, registry);
    benchmark::DoNotOptimize(replay_file(gateway, path));
  }
}
BENCHMARK(BM_Replay)->Unit(benchmark::kMillisecond);

static void BM_BuildReport(benchmark::State& state) {
  const auto& r = bench_resources();
  const auto& events = replay_events();
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_report(events, r.ad_domains, r.psl, r.taxonomy));
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * events.size()));
}
BENCHMARK(BM_BuildReport)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
