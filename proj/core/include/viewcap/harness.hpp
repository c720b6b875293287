#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "viewcap/config.hpp"
#include "viewcap/langmetrics.hpp"
#include "viewcap/policy.hpp"

namespace viewcap {

struct DatasetSplit {
  std::vector<std::uint64_t> train;
  std::vector<std::uint64_t> validation;
  std::vector<std::uint64_t> test;
  // Deterministic start poses: validation scenes use the 4x4 anchor
  // sub-grid, test scenes the remaining free cells.
  std::map<std::uint64_t, std::vector<Pose>> val_starts;
  std::map<std::uint64_t, std::vector<Pose>> test_starts;
};

struct Dataset {
  std::vector<Scene> scenes;  // all splits; scene.seed is the id
  DatasetSplit split;

  const Scene& scene(std::uint64_t id) const;
  std::vector<Scene> scenes_of(const std::vector<std::uint64_t>& ids) const;
};

// Deterministic scene generation plus split assignment.
Dataset make_splits(const ExperimentConfig& cfg);

// Deduplicated captions of every viewpoint in the gamma band, generated at
// the annotation noise seed. Throws DegenerateScene when s_max <= 0.
ReferenceSet ground_truth_refs(const Scene& scene, const ScoreMap& smap,
                               double gamma, const Lexicon& lex,
                               const NoiseConfig& annotation_noise,
                               const Visibility& vis = {});

// Uniform over feasible actions (Stop included), same reward accounting as
// policy rollouts.
Episode random_policy_rollout(const Scene& scene, Pose start,
                              const Lexicon& lex, const NoiseConfig& noise,
                              const ScoringConfig& scoring,
                              const TrainConfig& cfg, std::uint64_t seed,
                              const Visibility& vis = {});

struct EpisodeRecord {
  std::string method;
  std::uint64_t scene_id = 0;
  Pose start;
  int nos = 0;
  double sol = 0.0;
  Tokens caption;
  bool stopped = false;
  double bleu1 = 0, bleu2 = 0, bleu3 = 0, bleu4 = 0;
  double meteor = 0, rouge = 0, cider = 0;
};

struct MethodRow {
  std::string method;
  int episodes = 0;
  double nos = 0, sol = 0;
  double bleu1 = 0, bleu2 = 0, bleu3 = 0, bleu4 = 0;
  double meteor = 0, rouge = 0, cider = 0;
};

struct EvalReport {
  std::vector<MethodRow> rows;
  std::vector<EpisodeRecord> details;
};

// Evaluation method: the random baseline or a policy checkpoint.
struct EvalMethod {
  std::string name;
  std::optional<PolicyParams> params;  // absent -> random baseline
};

// Greedy rollouts over every test scene x start pose; language metrics are
// computed against the gamma-band ground truth annotations.
MethodRow evaluate(const EvalMethod& method, const Dataset& data,
                   const ExperimentConfig& cfg, const Lexicon& lex,
                   std::vector<EpisodeRecord>* details = nullptr);

enum class OverlayKind { None, Heat, Trajectory };
struct Overlay {
  OverlayKind kind = OverlayKind::None;
  const ScoreMap* heat = nullptr;
  const Episode* trajectory = nullptr;
};

// One header line plus `height` grid rows: '#' obstacles, category initials
// for objects, '.' free cells; heat as per-cell deciles 0-9, trajectories as
// step digits with 'S' start and 'E' end.
std::string render_ascii(const Scene& scene, const Overlay& overlay = {});

std::string report_to_csv(const EvalReport& report);
std::string report_to_json(const EvalReport& report);

struct RunPaths {
  std::string root;
  std::string config_json;
  std::string scenes_dir;
  std::string splits_json;
  std::string annotations_jsonl;
  std::string demos_jsonl;
  std::string checkpoint_il;
  std::string checkpoint_rl;
  std::string report_csv;
  std::string report_json;
};

// generate -> annotate -> demos -> train-il -> train-rl -> evaluate.
// Writes every artifact under cfg.out_dir; errors carry a stage label.
// With dry_run, prints the plan to `log` and writes nothing.
RunPaths run_experiment(const ExperimentConfig& cfg, bool dry_run,
                        std::ostream& log);

}  // namespace viewcap
