#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "viewcap/rng.hpp"
#include "viewcap/scoring.hpp"

using namespace viewcap;

namespace {

const Lexicon& lex() {
  static Lexicon l = build_lexicon(21);
  return l;
}

// Exhaustive maximum over all injective assignments (test oracle).
double brute_force_max(const std::vector<std::vector<double>>& w) {
  int n = int(w.size());
  int m = n ? int(w[0].size()) : 0;
  if (n == 0 || m == 0) return 0.0;
  if (n <= m) {
    std::vector<int> cols(static_cast<size_t>(m));
    std::iota(cols.begin(), cols.end(), 0);
    double best = 0.0;
    do {
      double total = 0.0;
      for (int i = 0; i < n; ++i) total += w[size_t(i)][size_t(cols[size_t(i)])];
      best = std::max(best, total);
    } while (std::next_permutation(cols.begin(), cols.end()));
    return best;
  }
  std::vector<std::vector<double>> t(size_t(m), std::vector<double>(static_cast<size_t>(n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) t[size_t(j)][size_t(i)] = w[size_t(i)][size_t(j)];
  return brute_force_max(t);
}

Observation obs_with(std::vector<Detection> dets, std::vector<std::string> caption) {
  Observation o;
  o.detections = std::move(dets);
  o.caption = std::move(caption);
  return o;
}

}  // namespace

TEST_CASE("iou cases") {
  Rect a{0, 0, 1, 0.5};
  Rect b{0, 0, 1, 1};
  CHECK(iou(a, a) == doctest::Approx(1.0));
  CHECK(iou(a, b) == doctest::Approx(0.5));
  CHECK(iou({0, 0, 0.4, 0.4}, {0.5, 0.5, 1, 1}) == 0.0);
}

TEST_CASE("pair similarity") {
  CaptionWord couch{"couch", std::nullopt};
  Detection d{"couch", 0.9, {0.2, 0.2, 0.8, 0.8}};
  CHECK(pair_similarity(lex(), d, couch, ObsMode::Caption) == doctest::Approx(1.0));

  // negative cosine clamps to zero: scan for a negatively-correlated pair
  bool found = false;
  const auto& words = lex().words();
  for (size_t i = 0; i < words.size() && !found; ++i)
    for (size_t j = 0; j < words.size() && !found; ++j) {
      if (!lex().is_noun(int(i)) || !lex().is_noun(int(j))) continue;
      if (cosine(lex(), words[i], words[j]) < -0.05) {
        Detection di{words[i], 1.0, {}};
        CaptionWord wj{words[j], std::nullopt};
        CHECK(pair_similarity(lex(), di, wj, ObsMode::Caption) == 0.0);
        found = true;
      }
    }
  CHECK(found);

  // dense mode: identical word and box, confidence 0.8
  CaptionWord dense{"couch", CaptionBox{{0.2, 0.2, 0.8, 0.8}, 0.8}};
  CHECK(pair_similarity(lex(), d, dense, ObsMode::Dense) == doctest::Approx(0.8));
}

TEST_CASE("hungarian identity and swap") {
  Matching m1 = hungarian_max_matching({{1, 0}, {0, 1}});
  CHECK(m1.total == doctest::Approx(2.0));
  REQUIRE(m1.pairs.size() == 2);
  CHECK(m1.pairs[0] == std::pair{0, 0});
  CHECK(m1.pairs[1] == std::pair{1, 1});

  Matching m2 = hungarian_max_matching({{0.9, 0.8}, {0.7, 0.1}});
  CHECK(m2.total == doctest::Approx(1.5));
  REQUIRE(m2.pairs.size() == 2);
  CHECK(m2.pairs[0] == std::pair{0, 1});
  CHECK(m2.pairs[1] == std::pair{1, 0});

  Matching empty = hungarian_max_matching({});
  CHECK(empty.total == 0.0);
  CHECK(empty.pairs.empty());
}

TEST_CASE("hungarian lexicographic tie break") {
  Matching m = hungarian_max_matching({{1, 1}, {1, 1}});
  REQUIRE(m.pairs.size() == 2);
  CHECK(m.pairs[0] == std::pair{0, 0});
  CHECK(m.pairs[1] == std::pair{1, 1});

  // ties across different multisets: {0.5, 0} vs {0.3, 0.2}
  Matching t = hungarian_max_matching({{0.5, 0.3}, {0.2, 0.0}});
  CHECK(t.total == doctest::Approx(0.5));
  CHECK(t.pairs[0] == std::pair{0, 0});  // lexicographically first optimum
  CHECK(t.pairs[1] == std::pair{1, 1});
}

TEST_CASE("hungarian equals brute force on random rectangular matrices") {
  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    int n = 1 + int(rng.below(6));
    int m = 1 + int(rng.below(6));
    std::vector<std::vector<double>> w(size_t(n), std::vector<double>(static_cast<size_t>(m)));
    for (auto& row : w)
      for (double& x : row) x = rng.uniform01();
    Matching got = hungarian_max_matching(w);
    double expect = brute_force_max(w);
    CHECK(std::abs(got.total - expect) < 1e-12);
    CHECK(got.pairs.size() == size_t(std::min(n, m)));
  }
}

TEST_CASE("sim hand cases") {
  ScoringConfig cfg = scoring_for(lex());
  CHECK(sim(obs_with({{"couch", 0.9, {}}}, {"couch"}), lex(), cfg) ==
        doctest::Approx(1.0));
  CHECK(sim(obs_with({}, {"couch"}), lex(), cfg) == 0.0);
  CHECK(sim(obs_with({{"couch", 0.9, {}}}, {"a", "the"}), lex(), cfg) == 0.0);
  CHECK(sim(obs_with({{"couch", 0.9, {}}, {"table", 0.8, {}}}, {"couch"}), lex(),
            cfg) == doctest::Approx(0.5));
}

TEST_CASE("sim is exactly invariant under permutations") {
  Rng rng(31);
  ScoringConfig cfg = scoring_for(lex());
  const auto& cats = lex().category_ids();
  for (int trial = 0; trial < 300; ++trial) {
    int n = 1 + int(rng.below(5));
    int m = 1 + int(rng.below(4));
    Observation o;
    for (int i = 0; i < n; ++i)
      o.detections.push_back(
          {lex().words()[size_t(cats[rng.below(cats.size())])],
           rng.uniform01(), {}});
    for (int j = 0; j < m; ++j)
      o.caption.push_back(lex().words()[size_t(cats[rng.below(cats.size())])]);
    double base = sim(o, lex(), cfg);

    Observation shuffled = o;
    for (size_t i = shuffled.detections.size(); i > 1; --i)
      std::swap(shuffled.detections[i - 1], shuffled.detections[rng.below(i)]);
    for (size_t i = shuffled.caption.size(); i > 1; --i)
      std::swap(shuffled.caption[i - 1], shuffled.caption[rng.below(i)]);
    CHECK(sim(shuffled, lex(), cfg) == base);  // bitwise equal
  }
}

TEST_CASE("viewpoint score and bounds") {
  ScoringConfig cfg = scoring_for(lex());
  CHECK(viewpoint_score(obs_with({}, {}), lex(), cfg) == 0.0);

  // sim = 1 and |O| = N gives 1 + lambda
  Observation full;
  for (int c : lex().category_ids())
    full.detections.push_back({lex().words()[size_t(c)], 1.0, {}});
  for (int c : lex().category_ids()) full.caption.push_back(lex().words()[size_t(c)]);
  CHECK(viewpoint_score(full, lex(), cfg) == doctest::Approx(1.0 + cfg.lambda));
}

TEST_CASE("adding a perfectly matched pair never lowers the score") {
  Rng rng(77);
  ScoringConfig cfg = scoring_for(lex());
  const auto& cats = lex().category_ids();
  for (int trial = 0; trial < 200; ++trial) {
    Observation o;
    int n = int(rng.below(4));
    std::vector<int> avail(cats.begin(), cats.end());
    for (size_t i = avail.size(); i > 1; --i)
      std::swap(avail[i - 1], avail[rng.below(i)]);
    for (int i = 0; i < n; ++i) {
      o.detections.push_back({lex().words()[size_t(avail[size_t(i)])],
                              0.5 + 0.5 * rng.uniform01(), {}});
      o.caption.push_back(lex().words()[size_t(avail[size_t(i)])]);
    }
    double before = viewpoint_score(o, lex(), cfg);
    // append one more matched detection+noun of an unused category
    o.detections.push_back({lex().words()[size_t(avail[size_t(n)])], 1.0, {}});
    o.caption.push_back(lex().words()[size_t(avail[size_t(n)])]);
    double after = viewpoint_score(o, lex(), cfg);
    CHECK(after >= before - 1e-12);
  }
}

TEST_CASE("fuzzed sim stays in [0,1] and score below 1 + lambda") {
  Rng rng(515);
  ScoringConfig cfg = scoring_for(lex());
  const auto& words = lex().words();
  for (int trial = 0; trial < 2000; ++trial) {
    Observation o;
    int n = int(rng.below(6));
    int m = int(rng.below(6));
    for (int i = 0; i < n; ++i) {
      const auto& cats = lex().category_ids();
      o.detections.push_back({words[size_t(cats[rng.below(cats.size())])],
                              rng.uniform01(), {}});
    }
    for (int j = 0; j < m; ++j) o.caption.push_back(words[rng.below(words.size())]);
    double s = sim(o, lex(), cfg);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    double v = viewpoint_score(o, lex(), cfg);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0 + cfg.lambda + 1e-12);
  }
}

TEST_CASE("score_map basics") {
  ScoringConfig cfg = scoring_for(lex());
  NoiseConfig annotation;
  annotation.episode_seed = 1;

  SceneGenConfig none;
  none.min_objects = 0;
  none.max_objects = 0;
  Scene empty = generate_scene(none, 3);
  ScoreMap zero = score_map(empty, lex(), cfg, annotation);
  CHECK(zero.s_max == 0.0);
  for (double s : zero.scores) CHECK(s == 0.0);

  SceneGenConfig gen;
  Scene s = generate_scene(gen, 90210);
  ScoreMap a = score_map(s, lex(), cfg, annotation);
  ScoreMap b = score_map(s, lex(), cfg, annotation);
  CHECK(a.scores == b.scores);
  CHECK(a.s_max == b.s_max);
  CHECK(a.poses.size() == a.scores.size());
  for (double v : a.scores) CHECK(v <= a.s_max);
  CHECK(a.scores[size_t(a.argmax_index)] == a.s_max);
  CHECK(a.s_max > 0.0);
}
