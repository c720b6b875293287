#include "viewcap/perception.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "viewcap/errors.hpp"
#include "viewcap/rng.hpp"

namespace viewcap {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kFalsePositiveConfidence = 0.3;
constexpr double kSubstitutedBoxConfidence = 0.3;

enum StreamSalt : std::uint64_t {
  kSaltDetect = 0xde7ec7,
  kSaltCaption = 0xca9710,
  kSaltDenseBox = 0xb0c5e5,
};

Rng pose_stream(const Scene& scene, Pose pose, const NoiseConfig& noise,
                std::uint64_t salt) {
  return Rng(hash_all({scene.seed, noise.episode_seed, std::uint64_t(pose.x),
                       std::uint64_t(pose.y), std::uint64_t(pose.h), salt}));
}

double wrap_deg(double a) {
  a = std::fmod(a + 180.0, 360.0);
  if (a < 0) a += 360.0;
  return a - 180.0;
}

// One emitted caption noun and the detection it came from.
struct CaptionSlot {
  std::string word;
  int source_detection = -1;
  bool substituted = false;
};

struct CaptionDraft {
  std::vector<std::string> tokens;
  std::vector<CaptionSlot> slots;  // emitted nouns, in caption order
  bool fallback = false;
  bool has_room_word = false;
};

CaptionDraft caption_draft(const Scene& scene, Pose pose,
                           const std::vector<Detection>& detections,
                           const Lexicon& lex, const NoiseConfig& noise) {
  CaptionDraft draft;
  if (detections.empty()) {
    draft.tokens = {"a", "wall", "with", "a", "wall"};
    draft.fallback = true;
    return draft;
  }

  // Highest confidence first, stable so the nearer detection wins ties.
  std::vector<int> order(detections.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return detections[size_t(a)].confidence > detections[size_t(b)].confidence;
  });

  std::vector<CaptionSlot> picked;
  for (int idx : order) {
    if (int(picked.size()) >= noise.k_caption) break;
    const auto& cat = detections[size_t(idx)].category;
    bool dup = false;
    for (const auto& p : picked) dup = dup || p.word == cat;
    if (!dup) picked.push_back({cat, idx, false});
  }

  Rng rng = pose_stream(scene, pose, noise, kSaltCaption);
  std::vector<int> nouns;
  for (const auto& g : lex.synonym_groups())
    nouns.insert(nouns.end(), g.begin(), g.end());
  std::vector<CaptionSlot> kept;
  for (auto& slot : picked) {
    if (rng.bernoulli(noise.p_sub)) {
      // Uniform over nouns different from the source category.
      int pick;
      do {
        pick = nouns[rng.below(nouns.size())];
      } while (lex.words()[size_t(pick)] == slot.word);
      slot.word = lex.words()[size_t(pick)];
      slot.substituted = true;
    }
    if (!rng.bernoulli(noise.p_omit)) kept.push_back(slot);
  }

  draft.tokens = {"a", scene.room_type};
  draft.has_room_word = true;
  if (!kept.empty()) {
    draft.tokens.push_back("with");
    for (size_t i = 0; i < kept.size(); ++i) {
      if (i > 0) draft.tokens.push_back("and");
      draft.tokens.push_back("a");
      draft.tokens.push_back(kept[i].word);
    }
  }
  draft.slots = std::move(kept);
  return draft;
}

}  // namespace

std::vector<Detection> detect(const Scene& scene, Pose pose, const Lexicon& lex,
                              const NoiseConfig& noise, const Visibility& vis) {
  Rng rng = pose_stream(scene, pose, noise, kSaltDetect);
  std::vector<Detection> out;
  for (const auto& v : visible_objects(scene, pose, vis)) {
    const auto& obj = scene.objects[size_t(v.object_index)];
    double conf = detection_confidence(obj.salience, v.distance, vis.range);
    bool missed = rng.bernoulli(noise.p_miss);
    if (missed || conf <= 0.0) continue;
    out.push_back({obj.category, conf, project_box(scene, pose, obj, vis)});
  }
  if (rng.bernoulli(noise.p_fp)) {
    const auto& cats = lex.category_ids();
    Detection fp;
    fp.category = lex.words()[size_t(cats[rng.below(cats.size())])];
    fp.confidence = kFalsePositiveConfidence;
    double cx = 0.1 + 0.8 * rng.uniform01();
    double cy = 0.3 + 0.4 * rng.uniform01();
    double w = 0.05 + 0.15 * rng.uniform01();
    double h = 0.05 + 0.15 * rng.uniform01();
    fp.box = {std::max(0.0, cx - w), std::max(0.0, cy - h),
              std::min(1.0, cx + w), std::min(1.0, cy + h)};
    out.push_back(fp);
  }
  return out;
}

std::vector<std::string> make_caption(const Scene& scene, Pose pose,
                                      const std::vector<Detection>& detections,
                                      const Lexicon& lex,
                                      const NoiseConfig& noise) {
  return caption_draft(scene, pose, detections, lex, noise).tokens;
}

Rect project_box(const Scene& scene, Pose pose, const SceneObject& object,
                 const Visibility& vis) {
  auto visible = visible_objects(scene, pose, vis);
  const VisibleObject* hit = nullptr;
  for (const auto& v : visible)
    if (&scene.objects[size_t(v.object_index)] == &object) hit = &v;
  if (!hit) throw NotVisible("object not visible from pose");

  const double heading = 45.0 * pose.h;
  const double half = vis.fov_deg / 2.0;
  double lo = 1e9, hi = -1e9;
  for (Cell c : object.footprint) {
    double bearing = wrap_deg(
        std::atan2(double(c.x - pose.x), double(c.y - pose.y)) * 180.0 / kPi -
        heading);
    bearing = std::clamp(bearing, -half, half);
    lo = std::min(lo, bearing);
    hi = std::max(hi, bearing);
  }
  double height = std::min(1.0, 1.0 / (1.0 + hit->distance));
  Rect r{(lo + half) / vis.fov_deg, 0.5 - height / 2.0,
         (hi + half) / vis.fov_deg, 0.5 + height / 2.0};
  r.x0 = std::clamp(r.x0, 0.0, 1.0);
  r.x1 = std::clamp(r.x1, 0.0, 1.0);
  r.y0 = std::clamp(r.y0, 0.0, 1.0);
  r.y1 = std::clamp(r.y1, 0.0, 1.0);
  return r;
}

Observation observe(const Scene& scene, Pose pose, const Lexicon& lex,
                    const NoiseConfig& noise, ObsMode mode,
                    const Visibility& vis) {
  Observation obs;
  obs.pose = pose;
  obs.detections = detect(scene, pose, lex, noise, vis);
  CaptionDraft draft = caption_draft(scene, pose, obs.detections, lex, noise);
  obs.caption = draft.tokens;
  if (mode != ObsMode::Dense) return obs;

  std::vector<CaptionBox> boxes;
  Rng rng = pose_stream(scene, pose, noise, kSaltDenseBox);
  if (draft.fallback) {
    // "a wall with a wall": inert full-frame boxes for the two wall nouns.
    boxes.push_back({{0, 0, 1, 1}, 0.0});
    boxes.push_back({{0, 0, 1, 1}, 0.0});
  } else {
    if (draft.has_room_word) boxes.push_back({{0, 0, 1, 1}, 0.5});
    auto visible = visible_objects(scene, pose, vis);
    for (const auto& slot : draft.slots) {
      const Detection& src = obs.detections[size_t(slot.source_detection)];
      if (!slot.substituted) {
        boxes.push_back({src.box, src.confidence});
      } else if (!visible.empty()) {
        const auto& v = visible[rng.below(visible.size())];
        Rect box = project_box(scene, pose,
                               scene.objects[size_t(v.object_index)], vis);
        boxes.push_back({box, kSubstitutedBoxConfidence});
      } else {
        boxes.push_back({src.box, kSubstitutedBoxConfidence});
      }
    }
  }
  obs.caption_boxes = std::move(boxes);
  return obs;
}

std::string observation_to_json(const Observation& obs) {
  nlohmann::json j;
  j["pose"] = {{"x", obs.pose.x}, {"y", obs.pose.y}, {"h", obs.pose.h}};
  nlohmann::json dets = nlohmann::json::array();
  for (const auto& d : obs.detections)
    dets.push_back({{"category", d.category},
                    {"confidence", d.confidence},
                    {"box", {d.box.x0, d.box.y0, d.box.x1, d.box.y1}}});
  j["detections"] = dets;
  j["caption"] = obs.caption;
  if (obs.caption_boxes) {
    nlohmann::json boxes = nlohmann::json::array();
    for (const auto& b : *obs.caption_boxes)
      boxes.push_back({{"box", {b.box.x0, b.box.y0, b.box.x1, b.box.y1}},
                       {"confidence", b.confidence}});
    j["caption_boxes"] = boxes;
  }
  return j.dump(2);
}

}  // namespace viewcap
