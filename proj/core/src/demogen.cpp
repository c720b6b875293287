#include "viewcap/demogen.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"
#include "viewcap/errors.hpp"
#include "viewcap/rng.hpp"

namespace viewcap {

namespace {

// The unique action mapping pose u to pose v (cells equal or adjacent).
Action action_between(Pose u, Pose v) {
  Action a;
  a.rot = ((v.h - u.h) % 8 + 8) % 8;
  if (u.x == v.x && u.y == v.y) {
    a.move = 0;
    return a;
  }
  for (int d = 0; d < 8; ++d)
    if (u.x + kDirStep[size_t(d)].x == v.x && u.y + kDirStep[size_t(d)].y == v.y) {
      a.move = d + 1;
      return a;
    }
  throw Unreachable("poses are not one step apart");
}

}  // namespace

PathTables::PathTables(const Scene& scene, std::vector<Pose> nodes)
    : nodes_(std::move(nodes)), width_(scene.width), height_(scene.height) {
  node_index_.assign(size_t(width_) * size_t(height_) * 8, -1);
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const Pose& p = nodes_[i];
    node_index_[(size_t(p.y) * size_t(width_) + size_t(p.x)) * 8 + size_t(p.h)] =
        int(i);
  }
}

int PathTables::index_of(Pose p) const {
  if (p.x < 0 || p.x >= width_ || p.y < 0 || p.y >= height_ || p.h < 0 || p.h > 7)
    return -1;
  return node_index_[(size_t(p.y) * size_t(width_) + size_t(p.x)) * 8 + size_t(p.h)];
}

PathTables floyd_warshall(const Scene& scene) {
  PathTables t(scene, enumerate_viewpoints(scene));
  const size_t n = t.nodes_.size();
  t.dist_.assign(n * n, PathTables::kInf);
  t.next_.assign(n * n, PathTables::kInf);

  for (size_t u = 0; u < n; ++u) {
    t.dist_[u * n + u] = 0;
    t.next_[u * n + u] = std::uint16_t(u);
    const Pose pu = t.nodes_[u];
    ActionMask mask = feasible_actions(scene, pu);
    // idx 0 is Stop; every other feasible action is a unit edge.
    for (int idx = 1; idx < kNumActions; ++idx) {
      if (!mask[size_t(idx)]) continue;
      Pose pv = apply_action(scene, pu, action_from_index(idx));
      int v = t.index_of(pv);
      t.dist_[u * n + size_t(v)] = 1;
      t.next_[u * n + size_t(v)] = std::uint16_t(v);
    }
  }

  for (size_t k = 0; k < n; ++k) {
    const std::uint16_t* row_k = t.dist_.data() + k * n;
    for (size_t u = 0; u < n; ++u) {
      const std::uint16_t duk = t.dist_[u * n + k];
      if (duk == PathTables::kInf) continue;
      std::uint16_t* row_u = t.dist_.data() + u * n;
      std::uint16_t* next_u = t.next_.data() + u * n;
      const std::uint16_t via = t.next_[u * n + k];
      for (size_t v = 0; v < n; ++v) {
        if (row_k[v] == PathTables::kInf) continue;
        const std::uint16_t cand = std::uint16_t(duk + row_k[v]);
        if (cand < row_u[v]) {
          row_u[v] = cand;
          next_u[v] = via;
        }
      }
    }
  }
  return t;
}

Pose sample_target(const ScoreMap& smap, double gamma, std::uint64_t seed) {
  if (smap.s_max <= 0.0)
    throw DegenerateScene("score map has s_max <= 0");
  const double floor = gamma * smap.s_max;
  std::vector<int> band;
  for (size_t i = 0; i < smap.scores.size(); ++i)
    if (smap.scores[i] >= floor) band.push_back(int(i));
  // The argmax always qualifies.
  Rng rng(hash_all({seed, smap.scene_id, 0x7a26e7ULL}));
  return smap.poses[size_t(band[rng.below(band.size())])];
}

std::vector<Action> shortest_path_actions(const PathTables& tables, Pose from,
                                          Pose to) {
  int u = tables.index_of(from);
  int v = tables.index_of(to);
  if (u < 0 || v < 0) throw Unreachable("pose is not a valid viewpoint");
  if (tables.dist(u, v) == PathTables::kInf)
    throw Unreachable("no path between poses");

  std::vector<Action> actions;
  int cur = u;
  while (cur != v) {
    int nxt = tables.next(cur, v);
    actions.push_back(action_between(tables.nodes()[size_t(cur)],
                                     tables.nodes()[size_t(nxt)]));
    cur = nxt;
  }
  actions.push_back(kStop);
  return actions;
}

std::vector<Demonstration> make_demos(std::span<const Scene> scenes,
                                      const Lexicon& lex,
                                      const ScoringConfig& scoring,
                                      const NoiseConfig& annotation_noise,
                                      const DemoGenConfig& cfg,
                                      std::uint64_t seed,
                                      const Visibility& vis) {
  std::vector<Demonstration> demos;
  for (const auto& scene : scenes) {
    ScoreMap smap = score_map(scene, lex, scoring, annotation_noise, vis);
    Pose target = sample_target(smap, cfg.gamma, seed);
    PathTables tables = floyd_warshall(scene);
    int target_idx = tables.index_of(target);

    Rng rng(hash_all({seed, scene.seed, 0xde305ULL}));
    for (int d = 0; d < cfg.per_scene; ++d) {
      for (int attempt = 0; attempt < cfg.retries; ++attempt) {
        int start_idx = int(rng.below(std::uint64_t(tables.node_count())));
        int dist = tables.dist(start_idx, target_idx);
        if (dist == PathTables::kInf || dist + 1 > cfg.t_max) continue;

        Demonstration demo;
        demo.scene_id = scene.seed;
        demo.start = tables.nodes()[size_t(start_idx)];
        demo.target = target;
        demo.actions = shortest_path_actions(tables, demo.start, target);
        Pose p = demo.start;
        for (const Action& a : demo.actions) {
          demo.poses.push_back(p);
          p = apply_action(scene, p, a);
        }
        demos.push_back(std::move(demo));
        break;
      }
    }
  }
  return demos;
}

std::string demos_to_jsonl(std::span<const Demonstration> demos) {
  std::ostringstream os;
  for (const auto& d : demos) {
    nlohmann::json j;
    j["scene_id"] = d.scene_id;
    j["start"] = {d.start.x, d.start.y, d.start.h};
    j["target"] = {d.target.x, d.target.y, d.target.h};
    nlohmann::json actions = nlohmann::json::array();
    for (const Action& a : d.actions) actions.push_back({a.move, a.rot});
    j["actions"] = actions;
    nlohmann::json poses = nlohmann::json::array();
    for (const Pose& p : d.poses) poses.push_back({p.x, p.y, p.h});
    j["poses"] = poses;
    os << j.dump() << "\n";
  }
  return os.str();
}

std::vector<Demonstration> demos_from_jsonl(const std::string& text) {
  std::vector<Demonstration> demos;
  std::istringstream is(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      Demonstration d;
      d.scene_id = j.at("scene_id").get<std::uint64_t>();
      auto s = j.at("start");
      d.start = {s[0].get<int>(), s[1].get<int>(), s[2].get<int>()};
      auto t = j.at("target");
      d.target = {t[0].get<int>(), t[1].get<int>(), t[2].get<int>()};
      for (const auto& a : j.at("actions"))
        d.actions.push_back({a[0].get<int>(), a[1].get<int>()});
      for (const auto& p : j.at("poses"))
        d.poses.push_back({p[0].get<int>(), p[1].get<int>(), p[2].get<int>()});
      demos.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("demos line " + std::to_string(lineno), e.what());
    }
  }
  return demos;
}

}  // namespace viewcap
