// viewcap command line: scene generation, scoring, demonstrations, training
// and evaluation for the embodied viewpoint-search pipeline.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "viewcap/errors.hpp"
#include "viewcap/rng.hpp"
#include "viewcap/harness.hpp"

using namespace viewcap;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const std::string& path, const std::string& content) {
  if (auto dir = fs::path(path).parent_path(); !dir.empty())
    fs::create_directories(dir);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << content;
}

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;

  ExperimentConfig load() const {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    return cfg;
  }
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config_path, "JSON or TOML config file");
  cmd->add_option("--seed", common.seed, "override the experiment seed");
}

Pose parse_pose(const std::string& text) {
  int x, y, h;
  char c1, c2;
  std::istringstream is(text);
  if (!(is >> x >> c1 >> y >> c2 >> h) || c1 != ',' || c2 != ',')
    throw ConfigError("expected pose as x,y,h: " + text);
  return {x, y, h};
}

int run_gen_scenes(const Common& common, const std::string& out_dir) {
  ExperimentConfig cfg = common.load();
  Dataset data = make_splits(cfg);
  fs::create_directories(out_dir);
  for (const auto& scene : data.scenes)
    spill(out_dir + "/scene_" + std::to_string(scene.seed) + ".json",
          scene_to_json(scene));
  nlohmann::json j;
  j["train"] = data.split.train;
  j["validation"] = data.split.validation;
  j["test"] = data.split.test;
  spill(out_dir + "/splits.json", j.dump(2));
  std::cout << "wrote " << data.scenes.size() << " scenes to " << out_dir << "\n";
  return 0;
}

int run_score_map(const Common& common, const std::string& scene_path,
                  const std::string& csv_out) {
  ExperimentConfig cfg = common.load();
  Scene scene = scene_from_json(slurp(scene_path));
  Lexicon lex = build_lexicon(cfg.seed);
  NoiseConfig annotation = cfg.noise;
  annotation.episode_seed = cfg.annotation_seed;
  ScoreMap smap =
      score_map(scene, lex, cfg.scoring(lex), annotation, cfg.visibility);
  std::string csv = score_map_to_csv(smap);
  if (csv_out.empty())
    std::cout << csv;
  else
    spill(csv_out, csv);
  Overlay heat;
  heat.kind = OverlayKind::Heat;
  heat.heat = &smap;
  std::cout << render_ascii(scene, heat) << "s_max " << smap.s_max << " at ("
            << smap.argmax_pose.x << "," << smap.argmax_pose.y << ","
            << smap.argmax_pose.h << ")\n";
  return 0;
}

int run_observe(const Common& common, const std::string& scene_path,
                const std::string& pose_text, const std::string& mode) {
  ExperimentConfig cfg = common.load();
  Scene scene = scene_from_json(slurp(scene_path));
  Lexicon lex = build_lexicon(cfg.seed);
  Pose pose = parse_pose(pose_text);
  if (!scene.free_at(pose.cell())) throw ConfigError("pose is not a free cell");
  NoiseConfig noise = cfg.noise;
  noise.episode_seed = cfg.annotation_seed;
  Observation obs = observe(scene, pose, lex, noise,
                            mode == "dense" ? ObsMode::Dense : ObsMode::Caption,
                            cfg.visibility);
  std::cout << observation_to_json(obs) << "\n";
  return 0;
}

int run_demos(const Common& common, const std::string& out_path) {
  ExperimentConfig cfg = common.load();
  Lexicon lex = build_lexicon(cfg.seed);
  Dataset data = make_splits(cfg);
  NoiseConfig annotation = cfg.noise;
  annotation.episode_seed = cfg.annotation_seed;
  auto train = data.scenes_of(data.split.train);
  auto demos = make_demos(train, lex, cfg.scoring(lex), annotation, cfg.demos,
                          cfg.seed, cfg.visibility);
  spill(out_path, demos_to_jsonl(demos));
  std::cout << "wrote " << demos.size() << " demonstrations to " << out_path << "\n";
  return 0;
}

int run_train_il(const Common& common, const std::string& demos_path,
                 const std::string& checkpoint,
                 std::optional<double> lr, std::optional<int> epochs) {
  ExperimentConfig cfg = common.load();
  if (lr) cfg.train.lr = *lr;
  if (epochs) cfg.train.epochs = *epochs;
  Lexicon lex = build_lexicon(cfg.seed);
  Dataset data = make_splits(cfg);
  auto train_scenes = data.scenes_of(data.split.train);
  auto demos = demos_from_jsonl(slurp(demos_path));
  ReplayEnv env{train_scenes, lex, cfg.noise, cfg.scoring(lex), cfg.visibility};
  PolicyParams params = init_params(dims_for(lex), cfg.train.seed);
  std::vector<double> history;
  params = train_il(std::move(params), demos, cfg.train, env, &history);
  spill(checkpoint, params_to_json(params));
  std::cout << "trained on " << demos.size() << " demos, " << cfg.train.epochs
            << " epochs";
  if (!history.empty())
    std::cout << ", loss/step " << history.front() << " -> " << history.back();
  std::cout << "\nwrote " << checkpoint << "\n";
  return 0;
}

int run_train_rl(const Common& common, const std::string& checkpoint_in,
                 const std::string& checkpoint_out,
                 std::optional<double> lr, std::optional<int> iterations) {
  ExperimentConfig cfg = common.load();
  if (lr) cfg.train.lr = *lr;
  if (iterations) cfg.train.rl_iterations = *iterations;
  Lexicon lex = build_lexicon(cfg.seed);
  Dataset data = make_splits(cfg);
  auto train_scenes = data.scenes_of(data.split.train);
  PolicyParams params = params_from_json(slurp(checkpoint_in));
  std::vector<double> history;
  params = train_rl(std::move(params), train_scenes, lex, cfg.noise,
                    cfg.scoring(lex), cfg.train, &history, cfg.visibility);
  spill(checkpoint_out, params_to_json(params));
  if (!history.empty())
    std::cout << "mean batch return " << history.front() << " -> "
              << history.back() << "\n";
  std::cout << "wrote " << checkpoint_out << "\n";
  return 0;
}

int run_rollout(const Common& common, const std::string& scene_path,
                const std::string& checkpoint, const std::string& start_text,
                const std::string& mode) {
  ExperimentConfig cfg = common.load();
  Scene scene = scene_from_json(slurp(scene_path));
  Lexicon lex = build_lexicon(cfg.seed);
  Pose start = parse_pose(start_text);
  if (!scene.free_at(start.cell())) throw ConfigError("start is not a free cell");
  NoiseConfig noise = cfg.noise;
  noise.episode_seed = hash_all({cfg.eval.seed, scene.seed});
  Episode ep;
  if (checkpoint.empty()) {
    ep = random_policy_rollout(scene, start, lex, noise, cfg.scoring(lex),
                               cfg.train, cfg.eval.seed, cfg.visibility);
  } else {
    PolicyParams params = params_from_json(slurp(checkpoint));
    ep = rollout(params, scene, start, lex, noise, cfg.scoring(lex), cfg.train,
                 mode == "sample" ? RolloutMode::Sample : RolloutMode::Greedy,
                 cfg.eval.seed, cfg.visibility);
  }
  Overlay ov;
  ov.kind = OverlayKind::Trajectory;
  ov.trajectory = &ep;
  std::cout << render_ascii(scene, ov) << episode_to_json(ep) << "\n";
  return 0;
}

int run_eval(const Common& common, const std::string& il_checkpoint,
             const std::string& rl_checkpoint, const std::string& csv_out,
             const std::string& json_out) {
  ExperimentConfig cfg = common.load();
  Lexicon lex = build_lexicon(cfg.seed);
  Dataset data = make_splits(cfg);

  EvalReport report;
  std::vector<EvalMethod> methods;
  methods.push_back({"Random", std::nullopt});
  if (!il_checkpoint.empty())
    methods.push_back({"IL", params_from_json(slurp(il_checkpoint))});
  if (!rl_checkpoint.empty())
    methods.push_back({"IL+RL", params_from_json(slurp(rl_checkpoint))});
  for (const auto& m : methods)
    report.rows.push_back(evaluate(m, data, cfg, lex, &report.details));

  std::string csv = report_to_csv(report);
  std::cout << csv;
  if (!csv_out.empty()) spill(csv_out, csv);
  if (!json_out.empty()) spill(json_out, report_to_json(report));
  return 0;
}

int run_metrics(const std::string& input_path, const std::string& csv_out) {
  // JSON lines: {"id": ..., "candidate": [...], "references": [[...], ...]}
  Lexicon lex = build_lexicon(0);
  std::istringstream is(slurp(input_path));
  std::string line;
  std::vector<std::string> ids;
  std::vector<CiderItem> corpus;
  size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      ids.push_back(j.contains("id") ? j.at("id").dump()
                                     : std::to_string(lineno));
      CiderItem item;
      item.candidate = j.at("candidate").get<Tokens>();
      item.refs = make_reference_set(
          j.at("references").get<std::vector<Tokens>>());
      corpus.push_back(std::move(item));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("metrics line " + std::to_string(lineno), e.what());
    }
  }
  if (corpus.empty()) throw ConfigError("no items in " + input_path);

  std::vector<double> ciders(corpus.size(), 0.0);
  if (corpus.size() >= 2) ciders = cider(corpus).per_item;

  std::ostringstream os;
  os << "id,BLEU-1,BLEU-2,BLEU-3,BLEU-4,Meteor-lite,ROUGE_L,CIDEr\n";
  double agg[7] = {0, 0, 0, 0, 0, 0, 0};
  char buf[256];
  for (size_t i = 0; i < corpus.size(); ++i) {
    const auto& c = corpus[i];
    double vals[7] = {bleu(c.candidate, c.refs, 1), bleu(c.candidate, c.refs, 2),
                      bleu(c.candidate, c.refs, 3), bleu(c.candidate, c.refs, 4),
                      meteor_lite(c.candidate, c.refs, lex),
                      rouge_l(c.candidate, c.refs), ciders[i]};
    std::snprintf(buf, sizeof buf, "%s,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f\n",
                  ids[i].c_str(), vals[0], vals[1], vals[2], vals[3], vals[4],
                  vals[5], vals[6]);
    os << buf;
    for (int k = 0; k < 7; ++k) agg[k] += vals[k];
  }
  std::snprintf(buf, sizeof buf, "mean,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f\n",
                agg[0] / double(corpus.size()), agg[1] / double(corpus.size()),
                agg[2] / double(corpus.size()), agg[3] / double(corpus.size()),
                agg[4] / double(corpus.size()), agg[5] / double(corpus.size()),
                agg[6] / double(corpus.size()));
  os << buf;
  if (csv_out.empty())
    std::cout << os.str();
  else
    spill(csv_out, os.str());
  return 0;
}

int run_render(const Common& common, const std::string& scene_path, bool heat) {
  ExperimentConfig cfg = common.load();
  Scene scene = scene_from_json(slurp(scene_path));
  if (heat) {
    Lexicon lex = build_lexicon(cfg.seed);
    NoiseConfig annotation = cfg.noise;
    annotation.episode_seed = cfg.annotation_seed;
    ScoreMap smap =
        score_map(scene, lex, cfg.scoring(lex), annotation, cfg.visibility);
    Overlay ov;
    ov.kind = OverlayKind::Heat;
    ov.heat = &smap;
    std::cout << render_ascii(scene, ov);
  } else {
    std::cout << render_ascii(scene);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"embodied viewpoint search: scenes, scoring, training, eval"};
  app.require_subcommand(1);

  Common common;
  std::string out_dir = "scenes";
  std::string scene_path, pose_text = "1,1,0", mode = "caption";
  std::string demos_path = "demos.jsonl";
  std::string checkpoint = "checkpoint.json", checkpoint_out = "checkpoint_rl.json";
  std::string il_ckpt, rl_ckpt, csv_out, json_out, input_path;
  std::string rollout_ckpt;
  std::optional<double> lr;
  std::optional<int> epochs, iterations;
  bool heat = false, dry_run = false;

  auto* gen = app.add_subcommand("gen-scenes", "generate the scene set and splits");
  add_common(gen, common);
  gen->add_option("--out", out_dir, "output directory");

  auto* smap = app.add_subcommand("score-map", "score every viewpoint of a scene");
  add_common(smap, common);
  smap->add_option("--scene", scene_path, "scene json")->required();
  smap->add_option("--csv", csv_out, "write per-pose csv here");

  auto* obs = app.add_subcommand("observe", "dump the observation at a pose");
  add_common(obs, common);
  obs->add_option("--scene", scene_path, "scene json")->required();
  obs->add_option("--pose", pose_text, "pose as x,y,h")->required();
  obs->add_option("--mode", mode, "caption|dense");

  auto* demos = app.add_subcommand("demos", "generate demonstration trajectories");
  add_common(demos, common);
  demos->add_option("--out", demos_path, "output jsonl");

  auto* til = app.add_subcommand("train-il", "imitation-learn from demonstrations");
  add_common(til, common);
  til->add_option("--demos", demos_path, "demonstrations jsonl")->required();
  til->add_option("--checkpoint", checkpoint, "output checkpoint");
  til->add_option("--lr", lr, "learning rate");
  til->add_option("--epochs", epochs, "training epochs");

  auto* trl = app.add_subcommand("train-rl", "fine-tune a checkpoint with policy gradient");
  add_common(trl, common);
  trl->add_option("--checkpoint", checkpoint, "input checkpoint")->required();
  trl->add_option("--out", checkpoint_out, "output checkpoint");
  trl->add_option("--lr", lr, "learning rate");
  trl->add_option("--iterations", iterations, "update count");

  auto* roll = app.add_subcommand("rollout", "run one episode in a scene");
  add_common(roll, common);
  roll->add_option("--scene", scene_path, "scene json")->required();
  roll->add_option("--checkpoint", rollout_ckpt, "policy checkpoint (empty = random)");
  roll->add_option("--start", pose_text, "start pose x,y,h")->required();
  roll->add_option("--mode", mode, "greedy|sample");

  auto* ev = app.add_subcommand("eval", "evaluate methods on the test split");
  add_common(ev, common);
  ev->add_option("--il", il_ckpt, "imitation checkpoint");
  ev->add_option("--rl", rl_ckpt, "fine-tuned checkpoint");
  ev->add_option("--csv", csv_out, "write report csv here");
  ev->add_option("--json", json_out, "write full report json here");

  auto* met = app.add_subcommand("metrics", "score candidate/reference json lines");
  met->add_option("--input", input_path, "jsonl with candidate + references")
      ->required();
  met->add_option("--csv", csv_out, "write per-item csv here");

  auto* ren = app.add_subcommand("render", "ascii-render a scene");
  add_common(ren, common);
  ren->add_option("--scene", scene_path, "scene json")->required();
  ren->add_flag("--heat", heat, "overlay the score heat map");

  auto* run = app.add_subcommand("run", "full pipeline: generate..evaluate");
  add_common(run, common);
  run->add_flag("--dry-run", dry_run, "print the plan, write nothing");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return run_gen_scenes(common, out_dir);
    if (smap->parsed()) return run_score_map(common, scene_path, csv_out);
    if (obs->parsed()) return run_observe(common, scene_path, pose_text, mode);
    if (demos->parsed()) return run_demos(common, demos_path);
    if (til->parsed())
      return run_train_il(common, demos_path, checkpoint, lr, epochs);
    if (trl->parsed())
      return run_train_rl(common, checkpoint, checkpoint_out, lr, iterations);
    if (roll->parsed())
      return run_rollout(common, scene_path, rollout_ckpt, pose_text, mode);
    if (ev->parsed()) return run_eval(common, il_ckpt, rl_ckpt, csv_out, json_out);
    if (met->parsed()) return run_metrics(input_path, csv_out);
    if (ren->parsed()) return run_render(common, scene_path, heat);
    if (run->parsed()) {
      ExperimentConfig cfg = common.load();
      run_experiment(cfg, dry_run, std::cout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
