#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "viewcap/perception.hpp"

namespace viewcap {

struct ScoringConfig {
  double lambda = 0.1;       // object-richness weight
  int total_categories = 1;  // N, number of possible object categories
  ObsMode mode = ObsMode::Caption;
};

inline ScoringConfig scoring_for(const Lexicon& lex,
                                 ObsMode mode = ObsMode::Caption,
                                 double lambda = 0.1) {
  return {lambda, lex.category_count(), mode};
}

// Intersection over union of two viewport rectangles; 0 when disjoint.
double iou(const Rect& a, const Rect& b);

// One extracted caption noun, with its box and confidence in dense mode.
struct CaptionWord {
  std::string word;
  std::optional<CaptionBox> box;
};

// R(o, w) = k * max(0, cos(o.category, w.word)); k = 1 in caption mode,
// k = IoU(o.box, w.box) * w.confidence in dense mode. Throws UnknownWord.
double pair_similarity(const Lexicon& lex, const Detection& o,
                       const CaptionWord& w, ObsMode mode);

struct Matching {
  std::vector<std::pair<int, int>> pairs;  // sorted by row index
  double total = 0.0;
};

// Maximum-weight one-to-one matching of size min(n, m) over a non-negative
// weight matrix; among optima, the lexicographically smallest (i, j)
// assignment is returned. Empty input yields an empty matching.
Matching hungarian_max_matching(const std::vector<std::vector<double>>& weights);

// Normalized matching similarity between detections and caption nouns:
// hungarian total / max(|O|, |W|), 0 when either side is empty.
double sim(const Observation& obs, const Lexicon& lex, const ScoringConfig& cfg);

// sim + lambda * |distinct detected categories| / N.
double viewpoint_score(const Observation& obs, const Lexicon& lex,
                       const ScoringConfig& cfg);

struct ScoreMap {
  std::uint64_t scene_id = 0;
  std::vector<Pose> poses;    // enumerate_viewpoints order
  std::vector<double> scores; // aligned with poses
  double s_max = 0.0;
  int argmax_index = 0;
  Pose argmax_pose;
};

// Scores every discrete viewpoint with observations drawn at the noise
// config's (annotation) seed.
ScoreMap score_map(const Scene& scene, const Lexicon& lex,
                   const ScoringConfig& cfg, const NoiseConfig& noise,
                   const Visibility& vis = {});

std::string score_map_to_csv(const ScoreMap& map);

}  // namespace viewcap
