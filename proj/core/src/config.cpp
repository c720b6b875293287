#include "viewcap/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "viewcap/errors.hpp"

namespace viewcap {

namespace {

using nlohmann::json;

// --- minimal TOML reader -------------------------------------------------
// Supports [section.sub], key = value with strings, integers, floats,
// booleans and flat arrays, plus # comments. Enough for config files.

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

json parse_toml_scalar(const std::string& raw, int lineno) {
  std::string v = trim(raw);
  if (v.empty()) throw ConfigError("toml line " + std::to_string(lineno) + ": empty value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      throw ConfigError("toml line " + std::to_string(lineno) + ": unterminated string");
    return v.substr(1, v.size() - 2);
  }
  if (v == "true") return true;
  if (v == "false") return false;
  bool is_float = v.find_first_of(".eE") != std::string::npos;
  try {
    size_t used = 0;
    if (is_float) {
      double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    }
    long long i = std::stoll(v, &used, 10);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("toml line " + std::to_string(lineno) + ": bad value '" + v + "'");
  }
}

json parse_toml(const std::string& text) {
  json root = json::object();
  json* section = &root;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    // strip comments outside strings
    bool in_str = false;
    for (size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_str = !in_str;
      if (line[i] == '#' && !in_str) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("toml line " + std::to_string(lineno) + ": bad table header");
      std::string path = trim(line.substr(1, line.size() - 2));
      section = &root;
      size_t at = 0;
      while (at != std::string::npos) {
        size_t dot = path.find('.', at);
        std::string part = path.substr(at, dot == std::string::npos ? dot : dot - at);
        part = trim(part);
        if (part.empty())
          throw ConfigError("toml line " + std::to_string(lineno) + ": empty table name");
        section = &((*section)[part]);
        if (section->is_null()) *section = json::object();
        at = dot == std::string::npos ? dot : dot + 1;
      }
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("toml line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("toml line " + std::to_string(lineno) + ": empty key");
    if (!value.empty() && value.front() == '[') {
      if (value.back() != ']')
        throw ConfigError("toml line " + std::to_string(lineno) + ": unterminated array");
      json arr = json::array();
      std::string inner = value.substr(1, value.size() - 2);
      std::string item;
      bool str = false;
      for (char c : inner) {
        if (c == '"') str = !str;
        if (c == ',' && !str) {
          if (!trim(item).empty()) arr.push_back(parse_toml_scalar(item, lineno));
          item.clear();
        } else {
          item += c;
        }
      }
      if (!trim(item).empty()) arr.push_back(parse_toml_scalar(item, lineno));
      (*section)[key] = arr;
    } else {
      (*section)[key] = parse_toml_scalar(value, lineno);
    }
  }
  return root;
}

// --- config extraction ----------------------------------------------------

template <typename T>
void take(json& obj, const char* key, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
  obj.erase(it);
}

void expect_empty(const json& obj, const std::string& where) {
  if (!obj.empty()) {
    std::string keys;
    for (auto it = obj.begin(); it != obj.end(); ++it)
      keys += (keys.empty() ? "" : ", ") + it.key();
    throw ConfigError("unknown config key(s) in " + where + ": " + keys);
  }
}

json take_object(json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) return json::object();
  if (!it->is_object())
    throw ConfigError(std::string("config key '") + key + "' must be a table");
  json sub = *it;
  obj.erase(it);
  return sub;
}

ExperimentConfig from_json(json j) {
  ExperimentConfig cfg;
  take(j, "seed", cfg.seed);
  take(j, "annotation_seed", cfg.annotation_seed);
  take(j, "lambda", cfg.lambda);
  take(j, "mode", cfg.mode);
  take(j, "out_dir", cfg.out_dir);
  if (cfg.mode != "caption" && cfg.mode != "dense")
    throw ConfigError("mode must be 'caption' or 'dense'");

  json scenes = take_object(j, "scenes");
  take(scenes, "per_type", cfg.scenes.per_type);
  take(scenes, "train_per_type", cfg.scenes.train_per_type);
  take(scenes, "val_per_type", cfg.scenes.val_per_type);
  take(scenes, "test_per_type", cfg.scenes.test_per_type);
  take(scenes, "min_size", cfg.scenes.min_size);
  take(scenes, "max_size", cfg.scenes.max_size);
  take(scenes, "min_objects", cfg.scenes.min_objects);
  take(scenes, "max_objects", cfg.scenes.max_objects);
  expect_empty(scenes, "scenes");
  if (cfg.scenes.train_per_type + cfg.scenes.val_per_type +
          cfg.scenes.test_per_type !=
      cfg.scenes.per_type)
    throw ConfigError("scenes: train + val + test must equal per_type");

  json noise = take_object(j, "noise");
  take(noise, "p_miss", cfg.noise.p_miss);
  take(noise, "p_fp", cfg.noise.p_fp);
  take(noise, "p_sub", cfg.noise.p_sub);
  take(noise, "p_omit", cfg.noise.p_omit);
  take(noise, "k_caption", cfg.noise.k_caption);
  expect_empty(noise, "noise");
  for (double p : {cfg.noise.p_miss, cfg.noise.p_fp, cfg.noise.p_sub, cfg.noise.p_omit})
    if (p < 0.0 || p > 1.0) throw ConfigError("noise probabilities must be in [0, 1]");

  json vis = take_object(j, "visibility");
  take(vis, "fov_deg", cfg.visibility.fov_deg);
  take(vis, "range", cfg.visibility.range);
  expect_empty(vis, "visibility");

  json demos = take_object(j, "demos");
  take(demos, "gamma", cfg.demos.gamma);
  take(demos, "per_scene", cfg.demos.per_scene);
  take(demos, "t_max", cfg.demos.t_max);
  take(demos, "retries", cfg.demos.retries);
  expect_empty(demos, "demos");

  json train = take_object(j, "train");
  take(train, "lr", cfg.train.lr);
  take(train, "beta", cfg.train.beta);
  take(train, "rho", cfg.train.rho);
  take(train, "horizon", cfg.train.horizon);
  take(train, "baseline_decay", cfg.train.baseline_decay);
  take(train, "batch_size", cfg.train.batch_size);
  take(train, "epochs", cfg.train.epochs);
  take(train, "rl_iterations", cfg.train.rl_iterations);
  take(train, "seed", cfg.train.seed);
  take(train, "clip_gradients", cfg.train.clip_gradients);
  take(train, "clip_norm", cfg.train.clip_norm);
  expect_empty(train, "train");
  if (!(cfg.train.beta > 0.0 && cfg.train.beta < 1.0))
    throw ConfigError("train.beta must be in (0, 1)");
  if (cfg.train.lr <= 0.0) throw ConfigError("train.lr must be positive");

  json eval = take_object(j, "eval");
  take(eval, "max_starts_per_scene", cfg.eval.max_starts_per_scene);
  take(eval, "seed", cfg.eval.seed);
  expect_empty(eval, "eval");

  expect_empty(j, "config root");
  return cfg;
}

}  // namespace

ObsMode ExperimentConfig::obs_mode() const {
  return mode == "dense" ? ObsMode::Dense : ObsMode::Caption;
}

ScoringConfig ExperimentConfig::scoring(const Lexicon& lex) const {
  return {lambda, lex.category_count(), obs_mode()};
}

ExperimentConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return from_json(std::move(j));
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".toml")
    return from_json(parse_toml(buf.str()));
  return config_from_json_text(buf.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["annotation_seed"] = cfg.annotation_seed;
  j["lambda"] = cfg.lambda;
  j["mode"] = cfg.mode;
  j["out_dir"] = cfg.out_dir;
  j["scenes"] = {{"per_type", cfg.scenes.per_type},
                 {"train_per_type", cfg.scenes.train_per_type},
                 {"val_per_type", cfg.scenes.val_per_type},
                 {"test_per_type", cfg.scenes.test_per_type},
                 {"min_size", cfg.scenes.min_size},
                 {"max_size", cfg.scenes.max_size},
                 {"min_objects", cfg.scenes.min_objects},
                 {"max_objects", cfg.scenes.max_objects}};
  j["noise"] = {{"p_miss", cfg.noise.p_miss},
                {"p_fp", cfg.noise.p_fp},
                {"p_sub", cfg.noise.p_sub},
                {"p_omit", cfg.noise.p_omit},
                {"k_caption", cfg.noise.k_caption}};
  j["visibility"] = {{"fov_deg", cfg.visibility.fov_deg},
                     {"range", cfg.visibility.range}};
  j["demos"] = {{"gamma", cfg.demos.gamma},
                {"per_scene", cfg.demos.per_scene},
                {"t_max", cfg.demos.t_max},
                {"retries", cfg.demos.retries}};
  j["train"] = {{"lr", cfg.train.lr},
                {"beta", cfg.train.beta},
                {"rho", cfg.train.rho},
                {"horizon", cfg.train.horizon},
                {"baseline_decay", cfg.train.baseline_decay},
                {"batch_size", cfg.train.batch_size},
                {"epochs", cfg.train.epochs},
                {"rl_iterations", cfg.train.rl_iterations},
                {"seed", cfg.train.seed},
                {"clip_gradients", cfg.train.clip_gradients},
                {"clip_norm", cfg.train.clip_norm}};
  j["eval"] = {{"max_starts_per_scene", cfg.eval.max_starts_per_scene},
               {"seed", cfg.eval.seed}};
  return j.dump(2);
}

}  // namespace viewcap
