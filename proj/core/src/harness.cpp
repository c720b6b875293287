#include "viewcap/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "viewcap/errors.hpp"
#include "viewcap/rng.hpp"
#include "viewcap/vocab.hpp"

namespace viewcap {

namespace fs = std::filesystem;

const Scene& Dataset::scene(std::uint64_t id) const {
  for (const auto& s : scenes)
    if (s.seed == id) return s;
  throw ConfigError("unknown scene id: " + std::to_string(id));
}

std::vector<Scene> Dataset::scenes_of(
    const std::vector<std::uint64_t>& ids) const {
  std::vector<Scene> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(scene(id));
  return out;
}

namespace {

// Anchor sub-grid for validation starts: one cell in every 4x4 block.
bool on_anchor_grid(Cell c) { return c.x % 4 == 1 && c.y % 4 == 1; }

std::vector<Pose> starts_for(const Scene& scene, bool anchors) {
  std::vector<Pose> out;
  for (int y = 0; y < scene.height; ++y)
    for (int x = 0; x < scene.width; ++x) {
      if (!scene.free_at({x, y})) continue;
      if (on_anchor_grid({x, y}) != anchors) continue;
      out.push_back({x, y, (x + y) % 8});
    }
  return out;
}

}  // namespace

Dataset make_splits(const ExperimentConfig& cfg) {
  Dataset data;
  const auto& types = vocab::room_types();
  Rng rng(hash_all({cfg.seed, 0x59115ULL}));

  for (size_t t = 0; t < types.size(); ++t) {
    for (int i = 0; i < cfg.scenes.per_type; ++i) {
      SceneGenConfig gen;
      gen.room_type = std::string(types[t]);
      gen.width = cfg.scenes.min_size +
                  int(rng.below(std::uint64_t(cfg.scenes.max_size -
                                              cfg.scenes.min_size + 1)));
      gen.height = cfg.scenes.min_size +
                   int(rng.below(std::uint64_t(cfg.scenes.max_size -
                                               cfg.scenes.min_size + 1)));
      gen.min_objects = cfg.scenes.min_objects;
      gen.max_objects = cfg.scenes.max_objects;
      std::uint64_t scene_seed =
          hash_all({cfg.seed, std::uint64_t(t), std::uint64_t(i), 0x5ceedULL});
      Scene scene = generate_scene(gen, scene_seed);
      std::uint64_t id = scene.seed;

      if (i < cfg.scenes.train_per_type) {
        data.split.train.push_back(id);
      } else if (i < cfg.scenes.train_per_type + cfg.scenes.val_per_type) {
        data.split.validation.push_back(id);
        data.split.val_starts[id] = starts_for(scene, true);
      } else {
        data.split.test.push_back(id);
        data.split.test_starts[id] = starts_for(scene, false);
      }
      data.scenes.push_back(std::move(scene));
    }
  }
  return data;
}

ReferenceSet ground_truth_refs(const Scene& scene, const ScoreMap& smap,
                               double gamma, const Lexicon& lex,
                               const NoiseConfig& annotation_noise,
                               const Visibility& vis) {
  if (smap.s_max <= 0.0) throw DegenerateScene("score map has s_max <= 0");
  const double floor = gamma * smap.s_max;
  std::vector<Tokens> captions;
  for (size_t i = 0; i < smap.poses.size(); ++i) {
    if (smap.scores[i] < floor) continue;
    Observation obs =
        observe(scene, smap.poses[i], lex, annotation_noise, ObsMode::Caption, vis);
    captions.push_back(obs.caption);
  }
  return make_reference_set(std::move(captions));
}

Episode random_policy_rollout(const Scene& scene, Pose start,
                              const Lexicon& lex, const NoiseConfig& noise,
                              const ScoringConfig& scoring,
                              const TrainConfig& cfg, std::uint64_t seed,
                              const Visibility& vis) {
  Episode ep;
  ep.scene_id = scene.seed;
  Rng rng(hash_all({seed, scene.seed, 0x2a4d03ULL}));

  Pose pose = start;
  Observation obs = observe(scene, pose, lex, noise, scoring.mode, vis);
  double score = viewpoint_score(obs, lex, scoring);
  ep.start_score = score;
  double p_prev = score;

  ep.termination = Termination::HorizonReached;
  for (int t = 0; t < cfg.horizon; ++t) {
    EpisodeStep st;
    st.pose = pose;
    st.obs = obs;
    st.score = score;
    st.step.mask = feasible_actions(scene, pose);

    std::vector<int> feasible;
    for (int a = 0; a < kNumActions; ++a)
      if (st.step.mask[size_t(a)]) feasible.push_back(a);
    int action = feasible[rng.below(feasible.size())];
    st.step.action = action;
    st.logp = -std::log(double(feasible.size()));

    const bool stop = is_stop(action_from_index(action));
    Pose next_pose = stop ? pose : apply_action(scene, pose, action_from_index(action));
    Observation next_obs =
        stop ? obs : observe(scene, next_pose, lex, noise, scoring.mode, vis);
    double next_score = stop ? score : viewpoint_score(next_obs, lex, scoring);

    double p_now = next_score - cfg.rho * double(t + 1);
    st.reward = p_now - p_prev;
    p_prev = p_now;

    ep.steps.push_back(std::move(st));
    pose = next_pose;
    obs = next_obs;
    score = next_score;
    if (stop) {
      ep.termination = Termination::Stopped;
      break;
    }
  }
  ep.final_pose = pose;
  ep.final_score = score;
  return ep;
}

MethodRow evaluate(const EvalMethod& method, const Dataset& data,
                   const ExperimentConfig& cfg, const Lexicon& lex,
                   std::vector<EpisodeRecord>* details) {
  const ScoringConfig scoring = cfg.scoring(lex);
  NoiseConfig annotation = cfg.noise;
  annotation.episode_seed = cfg.annotation_seed;

  std::vector<EpisodeRecord> records;
  std::vector<CiderItem> cider_corpus;

  for (std::uint64_t scene_id : data.split.test) {
    const Scene& scene = data.scene(scene_id);
    ScoreMap smap = score_map(scene, lex, scoring, annotation, cfg.visibility);
    ReferenceSet refs = ground_truth_refs(scene, smap, cfg.demos.gamma, lex,
                                          annotation, cfg.visibility);

    std::vector<Pose> starts = data.split.test_starts.at(scene_id);
    if (int(starts.size()) > cfg.eval.max_starts_per_scene) {
      Rng pick(hash_all({cfg.eval.seed, scene_id, 0x57a275ULL}));
      for (size_t i = starts.size(); i > 1; --i)
        std::swap(starts[i - 1], starts[pick.below(i)]);
      starts.resize(size_t(cfg.eval.max_starts_per_scene));
      std::sort(starts.begin(), starts.end(), [](Pose a, Pose b) {
        if (a.y != b.y) return a.y < b.y;
        if (a.x != b.x) return a.x < b.x;
        return a.h < b.h;
      });
    }

    for (const Pose& start : starts) {
      NoiseConfig ep_noise = cfg.noise;
      ep_noise.episode_seed =
          hash_all({cfg.eval.seed, scene_id, std::uint64_t(start.x),
                    std::uint64_t(start.y), std::uint64_t(start.h)});
      std::uint64_t ep_seed = hash_all({ep_noise.episode_seed, 0xe9150deULL});

      Episode ep;
      if (method.params) {
        ep = rollout(*method.params, scene, start, lex, ep_noise, scoring,
                     cfg.train, RolloutMode::Greedy, ep_seed, cfg.visibility);
      } else {
        ep = random_policy_rollout(scene, start, lex, ep_noise, scoring,
                                   cfg.train, ep_seed, cfg.visibility);
      }

      EpisodeRecord rec;
      rec.method = method.name;
      rec.scene_id = scene_id;
      rec.start = start;
      rec.nos = ep.termination == Termination::Stopped ? ep.nos() : cfg.train.horizon;
      rec.sol = ep.final_score;
      rec.stopped = ep.termination == Termination::Stopped;
      Observation final_obs = observe(scene, ep.final_pose, lex, ep_noise,
                                      cfg.obs_mode(), cfg.visibility);
      rec.caption = final_obs.caption;
      rec.bleu1 = bleu(rec.caption, refs, 1);
      rec.bleu2 = bleu(rec.caption, refs, 2);
      rec.bleu3 = bleu(rec.caption, refs, 3);
      rec.bleu4 = bleu(rec.caption, refs, 4);
      rec.meteor = meteor_lite(rec.caption, refs, lex);
      rec.rouge = rouge_l(rec.caption, refs);
      records.push_back(rec);
      cider_corpus.push_back({rec.caption, refs});
    }
  }

  if (cider_corpus.size() >= 2) {
    CiderResult cr = cider(cider_corpus);
    for (size_t i = 0; i < records.size(); ++i) records[i].cider = cr.per_item[i];
  }

  MethodRow row;
  row.method = method.name;
  row.episodes = int(records.size());
  for (const auto& r : records) {
    row.nos += r.nos;
    row.sol += r.sol;
    row.bleu1 += r.bleu1;
    row.bleu2 += r.bleu2;
    row.bleu3 += r.bleu3;
    row.bleu4 += r.bleu4;
    row.meteor += r.meteor;
    row.rouge += r.rouge;
    row.cider += r.cider;
  }
  if (!records.empty()) {
    double n = double(records.size());
    row.nos /= n;
    row.sol /= n;
    row.bleu1 /= n;
    row.bleu2 /= n;
    row.bleu3 /= n;
    row.bleu4 /= n;
    row.meteor /= n;
    row.rouge /= n;
    row.cider /= n;
  }
  if (details)
    details->insert(details->end(), records.begin(), records.end());
  return row;
}

std::string render_ascii(const Scene& scene, const Overlay& overlay) {
  std::ostringstream os;
  os << scene.room_type << " " << scene.width << "x" << scene.height
     << " seed=" << scene.seed << "\n";

  std::vector<std::string> rows(size_t(scene.height),
                                std::string(size_t(scene.width), '.'));
  auto put = [&](Cell c, char ch) {
    // row 0 renders the top (y = height-1)
    rows[size_t(scene.height - 1 - c.y)][size_t(c.x)] = ch;
  };
  for (int y = 0; y < scene.height; ++y)
    for (int x = 0; x < scene.width; ++x)
      if (scene.at({x, y}) == CellKind::Obstacle) put({x, y}, '#');
  for (const auto& obj : scene.objects)
    for (Cell c : obj.footprint)
      put(c, obj.category.empty() ? '?' : obj.category[0]);

  if (overlay.kind == OverlayKind::Heat && overlay.heat) {
    // decile of the per-cell max over headings
    std::map<std::pair<int, int>, double> best;
    for (size_t i = 0; i < overlay.heat->poses.size(); ++i) {
      auto key = std::make_pair(overlay.heat->poses[i].x, overlay.heat->poses[i].y);
      auto it = best.find(key);
      if (it == best.end() || overlay.heat->scores[i] > it->second)
        best[key] = overlay.heat->scores[i];
    }
    const double top = overlay.heat->s_max;
    for (const auto& [key, value] : best) {
      int decile = top <= 0.0 ? 0 : std::min(9, int(10.0 * value / top));
      put({key.first, key.second}, char('0' + decile));
    }
  } else if (overlay.kind == OverlayKind::Trajectory && overlay.trajectory) {
    const auto& steps = overlay.trajectory->steps;
    for (size_t t = 0; t < steps.size(); ++t)
      put(steps[t].pose.cell(), char('0' + int(t % 10)));
    if (!steps.empty()) {
      put(steps.front().pose.cell(), 'S');
      put(overlay.trajectory->final_pose.cell(), 'E');
    }
  }

  for (const auto& row : rows) os << row << "\n";
  return os.str();
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream os;
  os << "method,episodes,NoS,SoL,BLEU-1,BLEU-2,BLEU-3,BLEU-4,Meteor-lite,"
        "ROUGE_L,CIDEr\n";
  for (const auto& r : report.rows) {
    os << r.method << "," << r.episodes << "," << fmt(r.nos) << ","
       << fmt(r.sol) << "," << fmt(r.bleu1) << "," << fmt(r.bleu2) << ","
       << fmt(r.bleu3) << "," << fmt(r.bleu4) << "," << fmt(r.meteor) << ","
       << fmt(r.rouge) << "," << fmt(r.cider) << "\n";
  }
  return os.str();
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::json j;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"method", r.method},
                    {"episodes", r.episodes},
                    {"NoS", r.nos},
                    {"SoL", r.sol},
                    {"BLEU-1", r.bleu1},
                    {"BLEU-2", r.bleu2},
                    {"BLEU-3", r.bleu3},
                    {"BLEU-4", r.bleu4},
                    {"Meteor-lite", r.meteor},
                    {"ROUGE_L", r.rouge},
                    {"CIDEr", r.cider}});
  j["rows"] = rows;
  nlohmann::json details = nlohmann::json::array();
  for (const auto& d : report.details)
    details.push_back({{"method", d.method},
                       {"scene_id", d.scene_id},
                       {"start", {d.start.x, d.start.y, d.start.h}},
                       {"NoS", d.nos},
                       {"SoL", d.sol},
                       {"stopped", d.stopped},
                       {"caption", d.caption},
                       {"BLEU-1", d.bleu1},
                       {"BLEU-2", d.bleu2},
                       {"BLEU-3", d.bleu3},
                       {"BLEU-4", d.bleu4},
                       {"Meteor-lite", d.meteor},
                       {"ROUGE_L", d.rouge},
                       {"CIDEr", d.cider}});
  j["details"] = details;
  return j.dump(2);
}

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << content;
}

template <typename F>
auto stage(const std::string& name, std::ostream& log, F&& f) {
  log << "[run] " << name << "\n";
  try {
    return f();
  } catch (const std::exception& e) {
    throw std::runtime_error("stage '" + name + "' failed: " + e.what());
  }
}

}  // namespace

RunPaths run_experiment(const ExperimentConfig& cfg, bool dry_run,
                        std::ostream& log) {
  RunPaths paths;
  paths.root = cfg.out_dir;
  paths.config_json = cfg.out_dir + "/config.json";
  paths.scenes_dir = cfg.out_dir + "/scenes";
  paths.splits_json = cfg.out_dir + "/splits.json";
  paths.annotations_jsonl = cfg.out_dir + "/annotations.jsonl";
  paths.demos_jsonl = cfg.out_dir + "/demos.jsonl";
  paths.checkpoint_il = cfg.out_dir + "/checkpoints/il.json";
  paths.checkpoint_rl = cfg.out_dir + "/checkpoints/il_rl.json";
  paths.report_csv = cfg.out_dir + "/reports/report.csv";
  paths.report_json = cfg.out_dir + "/reports/report.json";

  if (dry_run) {
    log << "plan: generate scenes -> " << paths.scenes_dir << "\n"
        << "      splits          -> " << paths.splits_json << "\n"
        << "      annotations     -> " << paths.annotations_jsonl << "\n"
        << "      demos           -> " << paths.demos_jsonl << "\n"
        << "      train imitation -> " << paths.checkpoint_il << "\n"
        << "      fine-tune       -> " << paths.checkpoint_rl << "\n"
        << "      evaluate        -> " << paths.report_csv << ", "
        << paths.report_json << "\n";
    return paths;
  }

  fs::create_directories(paths.scenes_dir);
  fs::create_directories(cfg.out_dir + "/checkpoints");
  fs::create_directories(cfg.out_dir + "/reports");
  write_file(paths.config_json, config_to_json(cfg));

  Lexicon lex = build_lexicon(cfg.seed);
  const ScoringConfig scoring = cfg.scoring(lex);
  NoiseConfig annotation = cfg.noise;
  annotation.episode_seed = cfg.annotation_seed;

  Dataset data = stage("generate", log, [&] { return make_splits(cfg); });
  for (const auto& scene : data.scenes)
    write_file(paths.scenes_dir + "/scene_" + std::to_string(scene.seed) + ".json",
               scene_to_json(scene));
  {
    nlohmann::json j;
    j["train"] = data.split.train;
    j["validation"] = data.split.validation;
    j["test"] = data.split.test;
    nlohmann::json starts = nlohmann::json::object();
    for (const auto& [id, poses] : data.split.test_starts) {
      nlohmann::json arr = nlohmann::json::array();
      for (const Pose& p : poses) arr.push_back({p.x, p.y, p.h});
      starts[std::to_string(id)] = arr;
    }
    j["test_starts"] = starts;
    nlohmann::json vstarts = nlohmann::json::object();
    for (const auto& [id, poses] : data.split.val_starts) {
      nlohmann::json arr = nlohmann::json::array();
      for (const Pose& p : poses) arr.push_back({p.x, p.y, p.h});
      vstarts[std::to_string(id)] = arr;
    }
    j["val_starts"] = vstarts;
    write_file(paths.splits_json, j.dump(2));
  }

  stage("annotate", log, [&] {
    std::ostringstream os;
    for (const auto& scene : data.scenes) {
      ScoreMap smap = score_map(scene, lex, scoring, annotation, cfg.visibility);
      ReferenceSet refs = ground_truth_refs(scene, smap, cfg.demos.gamma, lex,
                                            annotation, cfg.visibility);
      nlohmann::json j;
      j["scene_id"] = scene.seed;
      j["s_max"] = smap.s_max;
      j["references"] = refs.references;
      os << j.dump() << "\n";
    }
    write_file(paths.annotations_jsonl, os.str());
    return 0;
  });

  std::vector<Scene> train_scenes = data.scenes_of(data.split.train);
  std::vector<Demonstration> demos = stage("demos", log, [&] {
    return make_demos(train_scenes, lex, scoring, annotation, cfg.demos,
                      cfg.seed, cfg.visibility);
  });
  write_file(paths.demos_jsonl, demos_to_jsonl(demos));
  log << "[run] demos: " << demos.size() << "\n";

  ReplayEnv env{train_scenes, lex, cfg.noise, scoring, cfg.visibility};
  PolicyParams il_params = stage("train-il", log, [&] {
    PolicyParams init = init_params(dims_for(lex), cfg.train.seed);
    std::vector<double> history;
    PolicyParams out = train_il(std::move(init), demos, cfg.train, env, &history);
    if (!history.empty())
      log << "[run] il loss/step: first " << history.front() << " last "
          << history.back() << "\n";
    return out;
  });
  write_file(paths.checkpoint_il, params_to_json(il_params));

  PolicyParams rl_params = stage("train-rl", log, [&] {
    return train_rl(il_params, train_scenes, lex, cfg.noise, scoring, cfg.train);
  });
  write_file(paths.checkpoint_rl, params_to_json(rl_params));

  EvalReport report = stage("evaluate", log, [&] {
    EvalReport rep;
    std::vector<EvalMethod> methods;
    methods.push_back({"Random", std::nullopt});
    methods.push_back({"IL", il_params});
    methods.push_back({"IL+RL", rl_params});
    for (const auto& m : methods)
      rep.rows.push_back(evaluate(m, data, cfg, lex, &rep.details));
    return rep;
  });
  write_file(paths.report_csv, report_to_csv(report));
  write_file(paths.report_json, report_to_json(report));
  for (const auto& row : report.rows)
    log << "[run] " << row.method << ": NoS " << row.nos << " SoL " << row.sol
        << "\n";
  return paths;
}

}  // namespace viewcap
