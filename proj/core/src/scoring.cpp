#include "viewcap/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "viewcap/errors.hpp"

namespace viewcap {

namespace {

constexpr double kTieEps = 1e-12;

// Maximum achievable matching weight (any size) for a non-negative matrix,
// via the O(k^3) Hungarian method on the square zero-padded cost matrix.
double hungarian_total(const std::vector<std::vector<double>>& w) {
  int n = int(w.size());
  int m = n ? int(w[0].size()) : 0;
  if (n == 0 || m == 0) return 0.0;
  int k = std::max(n, m);

  double maxw = 0.0;
  for (const auto& row : w)
    for (double x : row) maxw = std::max(maxw, x);

  auto cost = [&](int i, int j) -> double {
    if (i < n && j < m) return maxw - w[size_t(i)][size_t(j)];
    return maxw;  // padded cells carry weight 0
  };

  // Potentials-based assignment (rows 1..k, columns 1..k, 0 is virtual).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(size_t(k) + 1, 0.0), v(size_t(k) + 1, 0.0);
  std::vector<int> match(size_t(k) + 1, 0), way(size_t(k) + 1, 0);
  for (int i = 1; i <= k; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(size_t(k) + 1, inf);
    std::vector<char> used(size_t(k) + 1, false);
    do {
      used[size_t(j0)] = true;
      int i0 = match[size_t(j0)], j1 = 0;
      double delta = inf;
      for (int j = 1; j <= k; ++j) {
        if (used[size_t(j)]) continue;
        double cur = cost(i0 - 1, j - 1) - u[size_t(i0)] - v[size_t(j)];
        if (cur < minv[size_t(j)]) {
          minv[size_t(j)] = cur;
          way[size_t(j)] = j0;
        }
        if (minv[size_t(j)] < delta) {
          delta = minv[size_t(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= k; ++j) {
        if (used[size_t(j)]) {
          u[size_t(match[size_t(j)])] += delta;
          v[size_t(j)] -= delta;
        } else {
          minv[size_t(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[size_t(j0)] != 0);
    do {
      int j1 = way[size_t(j0)];
      match[size_t(j0)] = match[size_t(j1)];
      j0 = j1;
    } while (j0);
  }

  double total = 0.0;
  for (int j = 1; j <= k; ++j) {
    int i = match[size_t(j)];
    if (i >= 1 && i <= n && j <= m) total += w[size_t(i - 1)][size_t(j - 1)];
  }
  return total;
}

// Max additional weight over rows in `rows` and columns not in `used_cols`.
double best_remaining(const std::vector<std::vector<double>>& w,
                      const std::vector<int>& rows,
                      const std::vector<char>& used_cols) {
  if (rows.empty()) return 0.0;
  std::vector<int> cols;
  for (size_t j = 0; j < used_cols.size(); ++j)
    if (!used_cols[j]) cols.push_back(int(j));
  if (cols.empty()) return 0.0;
  std::vector<std::vector<double>> sub(rows.size(),
                                       std::vector<double>(cols.size()));
  for (size_t a = 0; a < rows.size(); ++a)
    for (size_t b = 0; b < cols.size(); ++b)
      sub[a][b] = w[size_t(rows[a])][size_t(cols[b])];
  return hungarian_total(sub);
}

}  // namespace

double iou(const Rect& a, const Rect& b) {
  double ix = std::max(0.0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
  double iy = std::max(0.0, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
  double inter = ix * iy;
  double area_a = (a.x1 - a.x0) * (a.y1 - a.y0);
  double area_b = (b.x1 - b.x0) * (b.y1 - b.y0);
  double uni = area_a + area_b - inter;
  return uni <= 0.0 ? 0.0 : inter / uni;
}

double pair_similarity(const Lexicon& lex, const Detection& o,
                       const CaptionWord& w, ObsMode mode) {
  double c = std::max(0.0, cosine(lex, o.category, w.word));
  if (mode == ObsMode::Caption) return c;
  if (!w.box) return 0.0;
  return iou(o.box, w.box->box) * w.box->confidence * c;
}

Matching hungarian_max_matching(const std::vector<std::vector<double>>& weights) {
  Matching result;
  int n = int(weights.size());
  int m = n ? int(weights[0].size()) : 0;
  if (n == 0 || m == 0) return result;

  const double target = hungarian_total(weights);
  const int size = std::min(n, m);

  // Lexicographic refinement: fix pairs slot by slot, keeping the total
  // optimal and the remaining slots fillable.
  std::vector<char> used_cols(size_t(m), false);
  double fixed = 0.0;
  int row = 0;
  for (int slot = 0; slot < size; ++slot) {
    bool chosen = false;
    for (int i = row; i < n && !chosen; ++i) {
      if (n - i - 1 < size - slot - 1) break;  // not enough rows left
      for (int j = 0; j < m && !chosen; ++j) {
        if (used_cols[size_t(j)]) continue;
        used_cols[size_t(j)] = true;
        std::vector<int> rest;
        for (int r = i + 1; r < n; ++r) rest.push_back(r);
        double attainable =
            fixed + weights[size_t(i)][size_t(j)] + best_remaining(weights, rest, used_cols);
        if (attainable >= target - kTieEps) {
          fixed += weights[size_t(i)][size_t(j)];
          result.pairs.emplace_back(i, j);
          row = i + 1;
          chosen = true;
        } else {
          used_cols[size_t(j)] = false;
        }
      }
    }
  }
  result.total = fixed;
  return result;
}

double sim(const Observation& obs, const Lexicon& lex, const ScoringConfig& cfg) {
  std::vector<std::string> nouns = extract_nouns(lex, obs.caption);
  const size_t n = obs.detections.size();
  const size_t m = nouns.size();
  if (n == 0 || m == 0) return 0.0;

  std::vector<CaptionWord> words(m);
  for (size_t j = 0; j < m; ++j) {
    words[j].word = nouns[j];
    if (cfg.mode == ObsMode::Dense && obs.caption_boxes &&
        j < obs.caption_boxes->size())
      words[j].box = (*obs.caption_boxes)[j];
  }

  std::vector<std::vector<double>> w(n, std::vector<double>(m));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j)
      w[i][j] = pair_similarity(lex, obs.detections[i], words[j], cfg.mode);

  Matching match = hungarian_max_matching(w);
  // Canonical summation order keeps sim exactly invariant to permutations
  // of the detection list or the caption nouns.
  std::vector<double> picked;
  picked.reserve(match.pairs.size());
  for (auto [i, j] : match.pairs) picked.push_back(w[size_t(i)][size_t(j)]);
  std::sort(picked.begin(), picked.end());
  double total = 0.0;
  for (double x : picked) total += x;
  return total / double(std::max(n, m));
}

double viewpoint_score(const Observation& obs, const Lexicon& lex,
                       const ScoringConfig& cfg) {
  std::set<std::string> distinct;
  for (const auto& d : obs.detections) distinct.insert(d.category);
  return sim(obs, lex, cfg) +
         cfg.lambda * double(distinct.size()) / double(cfg.total_categories);
}

ScoreMap score_map(const Scene& scene, const Lexicon& lex,
                   const ScoringConfig& cfg, const NoiseConfig& noise,
                   const Visibility& vis) {
  ScoreMap map;
  map.scene_id = scene.seed;
  map.poses = enumerate_viewpoints(scene);
  map.scores.reserve(map.poses.size());
  for (size_t i = 0; i < map.poses.size(); ++i) {
    Observation obs = observe(scene, map.poses[i], lex, noise, cfg.mode, vis);
    double s = viewpoint_score(obs, lex, cfg);
    map.scores.push_back(s);
    if (i == 0 || s > map.s_max) {
      map.s_max = s;
      map.argmax_index = int(i);
    }
  }
  if (!map.poses.empty()) map.argmax_pose = map.poses[size_t(map.argmax_index)];
  return map;
}

std::string score_map_to_csv(const ScoreMap& map) {
  std::ostringstream os;
  os << "x,y,h,score\n";
  char buf[64];
  for (size_t i = 0; i < map.poses.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%.9f\n", map.poses[i].x,
                  map.poses[i].y, map.poses[i].h, map.scores[i]);
    os << buf;
  }
  return os.str();
}

}  // namespace viewcap
