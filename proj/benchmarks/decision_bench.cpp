#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "bench_common.hpp"
#include "trackwall/categorizer.hpp"
#include "trackwall/policy.hpp"
#include "trackwall/tracker.hpp"

using namespace trackwall;

static PolicyConfig make_config(int url_rules) {
  PolicyConfig config;
  config.blocked_categories = {"adult", "religion", "health & fitness"};
  for (int i = 0; i < url_rules; ++i) {
    config.url_policies["http://u" + std::to_string(i) + ".example/"] = Verdict::kAllow;
  }
  return config;
}

static void BM_Resolve(benchmark::State& state) {
  const auto config = make_config(static_cast<int>(state.range(0)));
  const CategoryAssignment a{{"health & fitness", "science"}, AssignmentSource::kLexicon};
  for (auto _ : state) {
    benchmark::DoNotOptimize(resolve("http://www.page.example/a", a, config));
  }
}
BENCHMARK(BM_Resolve)->Arg(0)->Arg(100)->Arg(10000);

static void BM_ShouldBlock(benchmark::State& state) {
  const auto& r = bench_resources();
  TrackerRegistry registry;
  for (int t = 0; t < state.range(0); ++t) {
    for (int f = 0; f < 4; ++f) {
      registry.record("t" + std::to_string(t) + ".com", "f" + std::to_string(f) + ".org");
    }
  }
  const PolicyDecision block{Verdict::kBlock, DecisionReason::kCategoryMatch, {"religion"}};
  std::vector<std::string> hosts;
  for (int t = 0; t < 64; ++t) hosts.push_back("px.t" + std::to_string(t) + ".com");
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(should_block_request(hosts[i++ % hosts.size()], "www.page.example",
                                                  block, registry, r.allowlist, r.psl));
  }
}
BENCHMARK(BM_ShouldBlock)->Arg(100)->Arg(10000);

static void BM_SelectCategories(benchmark::State& state) {
  const auto& r = bench_resources();
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  CategoryScores scores;
  for (const auto& c : r.taxonomy.top_categories()) scores[c] = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(select_categories(scores, r.taxonomy));
}
BENCHMARK(BM_SelectCategories);

BENCHMARK_MAIN();
