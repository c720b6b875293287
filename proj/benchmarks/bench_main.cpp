#include <benchmark/benchmark.h>

#include "viewcap/demogen.hpp"
#include "viewcap/policy.hpp"
#include "viewcap/rng.hpp"

using namespace viewcap;

namespace {

std::vector<std::vector<double>> random_matrix(int n, int m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> w(size_t(n), std::vector<double>(static_cast<size_t>(m)));
  for (auto& row : w)
    for (double& x : row) x = rng.uniform01();
  return w;
}

const Scene& bench_scene() {
  static Scene s = [] {
    SceneGenConfig cfg;
    cfg.width = 12;
    cfg.height = 12;
    return generate_scene(cfg, 1);
  }();
  return s;
}

const Lexicon& bench_lexicon() {
  static Lexicon lex = build_lexicon(1);
  return lex;
}

}  // namespace

static void BM_HungarianMaxMatching(benchmark::State& state) {
  auto w = random_matrix(int(state.range(0)), int(state.range(0)), 7);
  for (auto _ : state)
    benchmark::DoNotOptimize(hungarian_max_matching(w).total);
}
BENCHMARK(BM_HungarianMaxMatching)->Arg(4)->Arg(8)->Arg(16);

static void BM_FloydWarshall(benchmark::State& state) {
  const Scene& s = bench_scene();
  for (auto _ : state) {
    PathTables t = floyd_warshall(s);
    benchmark::DoNotOptimize(t.dist(0, t.node_count() - 1));
  }
}
BENCHMARK(BM_FloydWarshall)->Unit(benchmark::kMillisecond);

static void BM_ScoreMap(benchmark::State& state) {
  const Scene& s = bench_scene();
  const Lexicon& lex = bench_lexicon();
  ScoringConfig cfg = scoring_for(lex);
  NoiseConfig noise;
  noise.episode_seed = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(score_map(s, lex, cfg, noise).s_max);
}
BENCHMARK(BM_ScoreMap)->Unit(benchmark::kMillisecond);

static void BM_Observe(benchmark::State& state) {
  const Scene& s = bench_scene();
  const Lexicon& lex = bench_lexicon();
  NoiseConfig noise;
  auto poses = enumerate_viewpoints(s);
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        observe(s, poses[i++ % poses.size()], lex, noise).detections.size());
  }
}
BENCHMARK(BM_Observe);

static void BM_PolicyBptt(benchmark::State& state) {
  const Lexicon& lex = bench_lexicon();
  PolicyParams params = init_params(dims_for(lex), 3);
  Rng rng(5);
  std::vector<WeightedTrajectory> batch(1);
  for (int t = 0; t < int(state.range(0)); ++t) {
    WeightedStep st;
    st.histogram.assign(size_t(params.dims.n_categories), 0.0);
    st.histogram[rng.below(40)] = rng.uniform01();
    st.bow_counts.assign(size_t(params.dims.bow_dim), 0.0);
    for (int k = 0; k < 5; ++k)
      st.bow_counts[rng.below(std::uint64_t(params.dims.bow_dim))] += 1.0;
    for (int a = 0; a < kNumActions; ++a) st.mask[size_t(a)] = true;
    st.action = int(rng.below(kNumActions));
    batch[0].push_back(std::move(st));
  }
  PolicyParams grad;
  for (auto _ : state)
    benchmark::DoNotOptimize(loss_and_grad(params, batch, grad));
}
BENCHMARK(BM_PolicyBptt)->Arg(10)->Arg(40);

BENCHMARK_MAIN();
