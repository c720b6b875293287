#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "viewcap/demogen.hpp"
#include "viewcap/policy.hpp"

namespace viewcap {

// Desk-scale defaults; every field can be overridden from a JSON or TOML
// config file.
struct ExperimentConfig {
  std::uint64_t seed = 7;

  struct Scenes {
    int per_type = 8;
    int train_per_type = 5;
    int val_per_type = 1;
    int test_per_type = 2;
    int min_size = 10;
    int max_size = 12;
    int min_objects = 5;
    int max_objects = 9;
  } scenes;

  NoiseConfig noise;                 // episode noise (seeds derived per episode)
  std::uint64_t annotation_seed = 1; // fixed noise stream for ground truth
  double lambda = 0.1;
  std::string mode = "caption";      // or "dense"
  Visibility visibility;

  DemoGenConfig demos;
  TrainConfig train;

  struct Eval {
    int max_starts_per_scene = 12;
    std::uint64_t seed = 3;
  } eval;

  std::string out_dir = "runs/default";

  ObsMode obs_mode() const;
  ScoringConfig scoring(const Lexicon& lex) const;
};

// Parses .json or .toml by extension (TOML subset: tables, scalars,
// arrays of scalars). Unknown keys are rejected. Throws ConfigError.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text);

std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace viewcap
