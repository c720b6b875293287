#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "viewcap/scoring.hpp"

namespace viewcap {

// Shortest-path demonstration: replaying `actions` from `start` visits
// `poses` (the pose each action is taken from) and ends at `target`; the
// last action is always Stop.
struct Demonstration {
  std::uint64_t scene_id = 0;
  Pose start;
  Pose target;
  std::vector<Action> actions;
  std::vector<Pose> poses;  // poses.size() == actions.size()
};

// All-pairs shortest step counts over the viewpoint graph (one composite
// non-Stop action per unit edge), with successor table for reconstruction.
class PathTables {
 public:
  static constexpr std::uint16_t kInf = 0xffff;

  PathTables(const Scene& scene, std::vector<Pose> nodes);

  int node_count() const { return int(nodes_.size()); }
  const std::vector<Pose>& nodes() const { return nodes_; }
  int index_of(Pose p) const;  // -1 when p is not a viewpoint

  std::uint16_t dist(int u, int v) const {
    return dist_[size_t(u) * size_t(nodes_.size()) + size_t(v)];
  }
  std::uint16_t next(int u, int v) const {
    return next_[size_t(u) * size_t(nodes_.size()) + size_t(v)];
  }

  friend PathTables floyd_warshall(const Scene& scene);

 private:
  std::vector<Pose> nodes_;
  std::vector<int> node_index_;  // dense (y*width + x)*8 + h -> node id
  int width_ = 0, height_ = 0;
  std::vector<std::uint16_t> dist_;
  std::vector<std::uint16_t> next_;
};

PathTables floyd_warshall(const Scene& scene);

// Uniform sample over the viewpoints whose score is within [gamma*s_max,
// s_max]. Throws DegenerateScene when s_max <= 0.
Pose sample_target(const ScoreMap& smap, double gamma, std::uint64_t seed);

// Shortest action sequence from `from` to `to`, Stop appended. When the
// poses are equal the sequence is just {Stop}. Throws Unreachable.
std::vector<Action> shortest_path_actions(const PathTables& tables, Pose from,
                                          Pose to);

struct DemoGenConfig {
  double gamma = 0.95;  // target band width
  int per_scene = 4;
  int t_max = 40;       // max actions per demo, Stop included
  int retries = 20;     // start resamples per demo slot
};

// Per scene: score map -> gamma-band target -> shortest paths from random
// start poses. Unreachable or overlong draws are resampled; slots that stay
// empty after the retry budget are dropped.
std::vector<Demonstration> make_demos(std::span<const Scene> scenes,
                                      const Lexicon& lex,
                                      const ScoringConfig& scoring,
                                      const NoiseConfig& annotation_noise,
                                      const DemoGenConfig& cfg,
                                      std::uint64_t seed,
                                      const Visibility& vis = {});

std::string demos_to_jsonl(std::span<const Demonstration> demos);
std::vector<Demonstration> demos_from_jsonl(const std::string& text);

}  // namespace viewcap
