#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "viewcap/gridscene.hpp"
#include "viewcap/lexicon.hpp"

namespace viewcap {

// Axis-aligned viewport rectangle, coordinates in [0, 1].
struct Rect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

struct Detection {
  std::string category;
  double confidence = 0.0;  // in [0, 1]
  Rect box;
};

struct CaptionBox {
  Rect box;
  double confidence = 0.0;
};

struct Observation {
  Pose pose;
  std::vector<Detection> detections;
  std::vector<std::string> caption;
  // Dense mode only: one entry per extracted caption noun, same order.
  std::optional<std::vector<CaptionBox>> caption_boxes;
};

enum class ObsMode { Caption, Dense };

struct NoiseConfig {
  double p_miss = 0.1;  // independent detection dropout
  double p_fp = 0.05;   // one spurious detection per observation
  double p_sub = 0.1;   // caption noun replaced by a random different noun
  double p_omit = 0.05; // caption noun dropped
  int k_caption = 3;    // max nouns per caption
  std::uint64_t episode_seed = 0;
};

inline NoiseConfig noiseless() { return {0, 0, 0, 0, 3, 0}; }

// Base detector confidence before noise.
inline double detection_confidence(double salience, double distance,
                                   double range) {
  double falloff = 1.0 - distance / range;
  return salience * (falloff > 0.0 ? falloff : 0.0);
}

// Synthetic detector. Deterministic given (scene.seed, noise.episode_seed,
// pose); revisiting a pose within one episode reproduces the observation.
std::vector<Detection> detect(const Scene& scene, Pose pose, const Lexicon& lex,
                              const NoiseConfig& noise,
                              const Visibility& vis = {});

// Caption oracle: "a {room_type} with a {n1} and a {n2} ..." over the
// k_caption highest-confidence distinct detected categories, or the
// degenerate "a wall with a wall" when nothing is detected.
std::vector<std::string> make_caption(const Scene& scene, Pose pose,
                                      const std::vector<Detection>& detections,
                                      const Lexicon& lex,
                                      const NoiseConfig& noise);

// Viewport rectangle of a visible object: x-extent from the footprint
// bearing span mapped across the field of view, height 1/(1+distance)
// centered vertically. Throws NotVisible.
Rect project_box(const Scene& scene, Pose pose, const SceneObject& object,
                 const Visibility& vis = {});

Observation observe(const Scene& scene, Pose pose, const Lexicon& lex,
                    const NoiseConfig& noise, ObsMode mode = ObsMode::Caption,
                    const Visibility& vis = {});

std::string observation_to_json(const Observation& obs);

}  // namespace viewcap
