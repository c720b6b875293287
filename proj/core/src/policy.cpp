#include "viewcap/policy.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "viewcap/errors.hpp"
#include "viewcap/rng.hpp"

namespace viewcap {

namespace {

void check_shapes(const PolicyParams& p) {
  const auto& d = p.dims;
  bool ok = int(p.W_L.size()) == d.embed_dim * d.bow_dim &&
            int(p.W_s.size()) == d.hidden * d.state_dim() &&
            int(p.W_h.size()) == d.hidden * d.hidden &&
            int(p.b.size()) == d.hidden &&
            int(p.W_o.size()) == d.n_actions * d.hidden &&
            int(p.b_o.size()) == d.n_actions;
  if (!ok) throw ConfigError("policy parameter shapes are inconsistent");
}

// y += M x, M is rows x cols row-major.
void matvec_acc(std::span<const double> M, std::span<const double> x, int rows,
                int cols, std::span<double> y) {
  for (int r = 0; r < rows; ++r) {
    double acc = 0.0;
    const double* row = M.data() + size_t(r) * size_t(cols);
    for (int c = 0; c < cols; ++c) acc += row[size_t(c)] * x[size_t(c)];
    y[size_t(r)] += acc;
  }
}

// y += M^T x (x has `rows` entries, y has `cols`).
void matvec_t_acc(std::span<const double> M, std::span<const double> x,
                  int rows, int cols, std::span<double> y) {
  for (int r = 0; r < rows; ++r) {
    const double xv = x[size_t(r)];
    if (xv == 0.0) continue;
    const double* row = M.data() + size_t(r) * size_t(cols);
    for (int c = 0; c < cols; ++c) y[size_t(c)] += xv * row[size_t(c)];
  }
}

// M += scale * a b^T.
void outer_acc(std::span<double> M, std::span<const double> a,
               std::span<const double> b, double scale = 1.0) {
  const int rows = int(a.size()), cols = int(b.size());
  for (int r = 0; r < rows; ++r) {
    const double av = scale * a[size_t(r)];
    if (av == 0.0) continue;
    double* row = M.data() + size_t(r) * size_t(cols);
    for (int c = 0; c < cols; ++c) row[size_t(c)] += av * b[size_t(c)];
  }
}

struct StepCache {
  std::vector<double> state;   // assembled s_t
  std::vector<double> hidden;  // h_t
  std::vector<double> probs;
};

std::vector<double> assemble_state(const PolicyParams& p,
                                   const WeightedStep& step) {
  const auto& d = p.dims;
  std::vector<double> s(size_t(d.state_dim()), 0.0);
  std::copy(step.histogram.begin(), step.histogram.end(), s.begin());
  std::span<double> lang(s.data() + d.n_categories, size_t(d.embed_dim));
  matvec_acc(p.W_L, step.bow_counts, d.embed_dim, d.bow_dim, lang);
  return s;
}

PolicyStepResult step_forward(const PolicyParams& p,
                              std::span<const double> h_prev,
                              std::span<const double> state,
                              const ActionMask& mask) {
  const auto& d = p.dims;
  PolicyStepResult out;
  out.hidden.assign(size_t(d.hidden), 0.0);
  std::copy(p.b.begin(), p.b.end(), out.hidden.begin());
  matvec_acc(p.W_s, state, d.hidden, d.state_dim(), out.hidden);
  matvec_acc(p.W_h, h_prev, d.hidden, d.hidden, out.hidden);
  for (double& h : out.hidden) h = std::tanh(h);

  std::vector<double> logits(size_t(d.n_actions), 0.0);
  std::copy(p.b_o.begin(), p.b_o.end(), logits.begin());
  matvec_acc(p.W_o, out.hidden, d.n_actions, d.hidden, logits);

  double max_logit = -1e300;
  bool any = false;
  for (int a = 0; a < d.n_actions; ++a)
    if (mask[size_t(a)]) {
      any = true;
      max_logit = std::max(max_logit, logits[size_t(a)]);
    }
  if (!any) throw EmptyMask("no feasible action");

  out.probs.assign(size_t(d.n_actions), 0.0);
  double z = 0.0;
  for (int a = 0; a < d.n_actions; ++a)
    if (mask[size_t(a)]) {
      out.probs[size_t(a)] = std::exp(logits[size_t(a)] - max_logit);
      z += out.probs[size_t(a)];
    }
  for (int a = 0; a < d.n_actions; ++a) out.probs[size_t(a)] /= z;
  return out;
}

double trajectory_loss_grad(const PolicyParams& p,
                            const WeightedTrajectory& traj, PolicyParams* grad) {
  const auto& d = p.dims;
  const int T = int(traj.size());
  std::vector<StepCache> cache(static_cast<size_t>(T));
  std::vector<double> h(size_t(d.hidden), 0.0);

  double loss = 0.0;
  for (int t = 0; t < T; ++t) {
    cache[size_t(t)].state = assemble_state(p, traj[size_t(t)]);
    auto res = step_forward(p, h, cache[size_t(t)].state, traj[size_t(t)].mask);
    cache[size_t(t)].hidden = std::move(res.hidden);
    cache[size_t(t)].probs = std::move(res.probs);
    h = cache[size_t(t)].hidden;
    double pa = cache[size_t(t)].probs[size_t(traj[size_t(t)].action)];
    loss += traj[size_t(t)].coeff * -std::log(std::max(pa, 1e-300));
  }
  if (!grad) return loss;

  std::vector<double> dh(size_t(d.hidden), 0.0);  // carried dL/dh_t
  for (int t = T - 1; t >= 0; --t) {
    const auto& step = traj[size_t(t)];
    const auto& c = cache[size_t(t)];

    // dL/dlogits = coeff * (p - onehot(a)) on feasible entries.
    std::vector<double> dlogits(size_t(d.n_actions), 0.0);
    for (int a = 0; a < d.n_actions; ++a)
      if (step.mask[size_t(a)]) dlogits[size_t(a)] = step.coeff * c.probs[size_t(a)];
    dlogits[size_t(step.action)] -= step.coeff;

    outer_acc(grad->W_o, dlogits, c.hidden);
    for (int a = 0; a < d.n_actions; ++a) grad->b_o[size_t(a)] += dlogits[size_t(a)];
    matvec_t_acc(p.W_o, dlogits, d.n_actions, d.hidden, dh);

    std::vector<double> dz(static_cast<size_t>(d.hidden));
    for (int i = 0; i < d.hidden; ++i)
      dz[size_t(i)] = dh[size_t(i)] * (1.0 - c.hidden[size_t(i)] * c.hidden[size_t(i)]);

    std::span<const double> h_prev =
        t == 0 ? std::span<const double>()
               : std::span<const double>(cache[size_t(t - 1)].hidden);
    outer_acc(grad->W_s, dz, c.state);
    if (t > 0) outer_acc(grad->W_h, dz, h_prev);
    for (int i = 0; i < d.hidden; ++i) grad->b[size_t(i)] += dz[size_t(i)];

    std::vector<double> ds(size_t(d.state_dim()), 0.0);
    matvec_t_acc(p.W_s, dz, d.hidden, d.state_dim(), ds);
    std::span<const double> ds_lang(ds.data() + d.n_categories,
                                    size_t(d.embed_dim));
    outer_acc(grad->W_L, ds_lang, step.bow_counts);

    dh.assign(size_t(d.hidden), 0.0);
    matvec_t_acc(p.W_h, dz, d.hidden, d.hidden, dh);
  }
  return loss;
}

}  // namespace

void PolicyParams::zero() {
  auto z = [](std::vector<double>& v) { std::fill(v.begin(), v.end(), 0.0); };
  z(W_L), z(W_s), z(W_h), z(b), z(W_o), z(b_o);
}

bool PolicyParams::finite() const {
  auto ok = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(),
                       [](double x) { return std::isfinite(x); });
  };
  return ok(W_L) && ok(W_s) && ok(W_h) && ok(b) && ok(W_o) && ok(b_o);
}

void PolicyParams::axpy(double scale, const PolicyParams& other) {
  auto add = [scale](std::vector<double>& a, const std::vector<double>& b) {
    for (size_t i = 0; i < a.size(); ++i) a[i] += scale * b[i];
  };
  add(W_L, other.W_L), add(W_s, other.W_s), add(W_h, other.W_h);
  add(b, other.b), add(W_o, other.W_o), add(b_o, other.b_o);
}

PolicyParams init_params(const PolicyDims& dims, std::uint64_t seed) {
  Rng rng(hash_all({seed, 0x9a2a35ULL}));
  PolicyParams p;
  p.dims = dims;
  auto uniform = [&](std::vector<double>& v, size_t n) {
    v.resize(n);
    for (double& x : v) x = 0.2 * rng.uniform01() - 0.1;
  };
  uniform(p.W_L, size_t(dims.embed_dim) * size_t(dims.bow_dim));
  uniform(p.W_s, size_t(dims.hidden) * size_t(dims.state_dim()));
  uniform(p.W_h, size_t(dims.hidden) * size_t(dims.hidden));
  p.b.assign(size_t(dims.hidden), 0.0);
  uniform(p.W_o, size_t(dims.n_actions) * size_t(dims.hidden));
  p.b_o.assign(size_t(dims.n_actions), 0.0);
  return p;
}

std::vector<double> state_vector(const Observation& obs,
                                 const PolicyParams& params,
                                 const Lexicon& lex) {
  WeightedStep step;
  step.histogram.assign(size_t(params.dims.n_categories), 0.0);
  for (const auto& det : obs.detections) {
    int slot = lex.category_slot(det.category);
    if (slot >= 0)
      step.histogram[size_t(slot)] =
          std::max(step.histogram[size_t(slot)], det.confidence);
  }
  auto counts = bow(lex, obs.caption);
  step.bow_counts.assign(counts.begin(), counts.end());
  return assemble_state(params, step);
}

PolicyStepResult policy_step(const PolicyParams& params,
                             std::span<const double> h_prev,
                             std::span<const double> state,
                             const ActionMask& mask) {
  check_shapes(params);
  return step_forward(params, h_prev, state, mask);
}

double loss_and_grad(const PolicyParams& params,
                     std::span<const WeightedTrajectory> batch,
                     PolicyParams& grad) {
  grad.dims = params.dims;
  grad.W_L.assign(params.W_L.size(), 0.0);
  grad.W_s.assign(params.W_s.size(), 0.0);
  grad.W_h.assign(params.W_h.size(), 0.0);
  grad.b.assign(params.b.size(), 0.0);
  grad.W_o.assign(params.W_o.size(), 0.0);
  grad.b_o.assign(params.b_o.size(), 0.0);
  double loss = 0.0;
  for (const auto& traj : batch) loss += trajectory_loss_grad(params, traj, &grad);
  return loss;
}

double loss_only(const PolicyParams& params,
                 std::span<const WeightedTrajectory> batch) {
  double loss = 0.0;
  for (const auto& traj : batch) loss += trajectory_loss_grad(params, traj, nullptr);
  return loss;
}

const Scene& ReplayEnv::scene(std::uint64_t id) const {
  for (const auto& s : scenes)
    if (s.seed == id) return s;
  throw ConfigError("unknown scene id: " + std::to_string(id));
}

WeightedTrajectory replay_demo(const Demonstration& demo,
                               const PolicyParams& params,
                               const ReplayEnv& env) {
  const Scene& scene = env.scene(demo.scene_id);
  NoiseConfig noise = env.noise;
  noise.episode_seed = hash_all(
      {env.noise.episode_seed, demo.scene_id, std::uint64_t(demo.start.x),
       std::uint64_t(demo.start.y), std::uint64_t(demo.start.h),
       std::uint64_t(demo.target.x), std::uint64_t(demo.target.y),
       std::uint64_t(demo.target.h)});

  WeightedTrajectory traj;
  traj.reserve(demo.poses.size());
  for (size_t t = 0; t < demo.poses.size(); ++t) {
    Observation obs =
        observe(scene, demo.poses[t], env.lex, noise, env.scoring.mode, env.vis);
    WeightedStep step;
    step.histogram.assign(size_t(params.dims.n_categories), 0.0);
    for (const auto& det : obs.detections) {
      int slot = env.lex.category_slot(det.category);
      if (slot >= 0)
        step.histogram[size_t(slot)] =
            std::max(step.histogram[size_t(slot)], det.confidence);
    }
    auto counts = bow(env.lex, obs.caption);
    step.bow_counts.assign(counts.begin(), counts.end());
    step.mask = feasible_actions(scene, demo.poses[t]);
    step.action = action_index(demo.actions[t]);
    step.coeff = 1.0;
    traj.push_back(std::move(step));
  }
  return traj;
}

std::pair<double, PolicyParams> il_loss_and_grad(
    const PolicyParams& params, std::span<const Demonstration> demos,
    const ReplayEnv& env) {
  std::vector<WeightedTrajectory> batch;
  batch.reserve(demos.size());
  for (const auto& demo : demos) batch.push_back(replay_demo(demo, params, env));
  PolicyParams grad;
  double loss = loss_and_grad(params, batch, grad);
  return {loss, std::move(grad)};
}

namespace {

double grad_norm(const PolicyParams& g) {
  double s = 0.0;
  for (const auto* v : {&g.W_L, &g.W_s, &g.W_h, &g.b, &g.W_o, &g.b_o})
    for (double x : *v) s += x * x;
  return std::sqrt(s);
}

void apply_update(PolicyParams& params, const PolicyParams& grad, double lr,
                  const TrainConfig& cfg, double direction) {
  double scale = direction * lr;
  if (cfg.clip_gradients) {
    double n = grad_norm(grad);
    if (n > cfg.clip_norm) scale *= cfg.clip_norm / n;
  }
  params.axpy(scale, grad);
  if (!params.finite())
    throw DivergenceDetected("policy parameters became non-finite");
}

}  // namespace

PolicyParams train_il(PolicyParams params, std::span<const Demonstration> demos,
                      const TrainConfig& cfg, const ReplayEnv& env,
                      std::vector<double>* history) {
  if (demos.empty() || cfg.epochs <= 0) return params;
  std::vector<size_t> order(demos.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(hash_all({cfg.seed, 0x117ea3ULL}));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.below(i)]);
    double epoch_loss = 0.0;
    size_t steps = 0;
    for (size_t at = 0; at < order.size(); at += size_t(cfg.batch_size)) {
      std::vector<Demonstration> batch;
      for (size_t k = at; k < std::min(order.size(), at + size_t(cfg.batch_size)); ++k)
        batch.push_back(demos[order[k]]);
      auto [loss, grad] = il_loss_and_grad(params, batch, env);
      if (!std::isfinite(loss))
        throw DivergenceDetected("imitation loss became non-finite");
      apply_update(params, grad, cfg.lr, cfg, -1.0);
      epoch_loss += loss;
      for (const auto& d : batch) steps += d.actions.size();
    }
    if (history) history->push_back(steps ? epoch_loss / double(steps) : 0.0);
  }
  return params;
}

int Episode::nos() const {
  if (termination == Termination::Stopped) return int(steps.size()) - 1;
  return int(steps.size());
}

double Episode::total_reward() const {
  double s = 0.0;
  for (const auto& st : steps) s += st.reward;
  return s;
}

Episode rollout(const PolicyParams& params, const Scene& scene, Pose start,
                const Lexicon& lex, const NoiseConfig& noise,
                const ScoringConfig& scoring, const TrainConfig& cfg,
                RolloutMode mode, std::uint64_t seed, const Visibility& vis) {
  Episode ep;
  ep.scene_id = scene.seed;
  Rng rng(hash_all({seed, scene.seed, 0x2011ed0ULL}));

  std::vector<double> h(size_t(params.dims.hidden), 0.0);
  Pose pose = start;
  Observation obs = observe(scene, pose, lex, noise, scoring.mode, vis);
  double score = viewpoint_score(obs, lex, scoring);
  ep.start_score = score;
  double p_prev = score;  // p before any action, no time penalty yet

  ep.termination = Termination::HorizonReached;
  for (int t = 0; t < cfg.horizon; ++t) {
    EpisodeStep st;
    st.pose = pose;
    st.obs = obs;
    st.score = score;
    st.step.histogram.assign(size_t(params.dims.n_categories), 0.0);
    for (const auto& det : obs.detections) {
      int slot = lex.category_slot(det.category);
      if (slot >= 0)
        st.step.histogram[size_t(slot)] =
            std::max(st.step.histogram[size_t(slot)], det.confidence);
    }
    auto counts = bow(lex, obs.caption);
    st.step.bow_counts.assign(counts.begin(), counts.end());
    st.step.mask = feasible_actions(scene, pose);

    auto state = assemble_state(params, st.step);
    auto res = step_forward(params, h, state, st.step.mask);
    h = res.hidden;

    int action = 0;
    if (mode == RolloutMode::Greedy) {
      double best = -1.0;
      for (int a = 0; a < params.dims.n_actions; ++a)
        if (res.probs[size_t(a)] > best) {
          best = res.probs[size_t(a)];
          action = a;
        }
    } else {
      double u = rng.uniform01();
      double acc = 0.0;
      action = -1;
      for (int a = 0; a < params.dims.n_actions; ++a) {
        acc += res.probs[size_t(a)];
        if (u < acc) {
          action = a;
          break;
        }
      }
      if (action < 0) {  // numerical leftovers: take the last feasible
        for (int a = params.dims.n_actions - 1; a >= 0; --a)
          if (st.step.mask[size_t(a)]) {
            action = a;
            break;
          }
      }
    }

    st.step.action = action;
    st.logp = std::log(std::max(res.probs[size_t(action)], 1e-300));

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

std::vector<double> returns(std::span<const double> rewards, double beta) {
  std::vector<double> out(rewards.size(), 0.0);
  double acc = 0.0;
  for (size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + beta * acc;
    out[i] = acc;
  }
  return out;
}

double reinforce_update(PolicyParams& params, std::span<const Episode> episodes,
                        double baseline, const TrainConfig& cfg) {
  std::vector<WeightedTrajectory> batch;
  double mean_return = 0.0;
  for (const auto& ep : episodes) {
    std::vector<double> rewards;
    rewards.reserve(ep.steps.size());
    for (const auto& st : ep.steps) rewards.push_back(st.reward);
    auto rets = returns(rewards, cfg.beta);
    if (!rets.empty()) mean_return += rets.front();

    WeightedTrajectory traj;
    traj.reserve(ep.steps.size());
    for (size_t t = 0; t < ep.steps.size(); ++t) {
      WeightedStep step = ep.steps[t].step;
      step.coeff = rets[t] - baseline;  // advantage
      traj.push_back(std::move(step));
    }
    batch.push_back(std::move(traj));
  }
  if (!episodes.empty()) mean_return /= double(episodes.size());

  PolicyParams grad;
  loss_and_grad(params, batch, grad);
  // Descent on sum coeff * (-log pi) is ascent on sum advantage * log pi.
  apply_update(params, grad, cfg.lr, cfg, -1.0);

  return cfg.baseline_decay * baseline + (1.0 - cfg.baseline_decay) * mean_return;
}

PolicyParams train_rl(PolicyParams params, std::span<const Scene> scenes,
                      const Lexicon& lex, const NoiseConfig& noise,
                      const ScoringConfig& scoring, const TrainConfig& cfg,
                      std::vector<double>* return_history,
                      const Visibility& vis) {
  if (scenes.empty() || cfg.rl_iterations <= 0) return params;
  Rng rng(hash_all({cfg.seed, 0x27ea12fULL}));
  double baseline = 0.0;

  for (int iter = 0; iter < cfg.rl_iterations; ++iter) {
    std::vector<Episode> episodes;
    episodes.reserve(size_t(cfg.batch_size));
    for (int k = 0; k < cfg.batch_size; ++k) {
      const Scene& scene = scenes[rng.below(scenes.size())];
      auto poses = enumerate_viewpoints(scene);
      Pose start = poses[rng.below(poses.size())];
      NoiseConfig ep_noise = noise;
      ep_noise.episode_seed = hash_all({noise.episode_seed, std::uint64_t(iter),
                                        std::uint64_t(k), 0x3a11edULL});
      episodes.push_back(rollout(params, scene, start, lex, ep_noise, scoring,
                                 cfg, RolloutMode::Sample, rng.next_u64(), vis));
    }
    baseline = reinforce_update(params, episodes, baseline, cfg);
    if (return_history) {
      double mean = 0.0;
      for (const auto& ep : episodes) {
        std::vector<double> rewards;
        for (const auto& st : ep.steps) rewards.push_back(st.reward);
        auto rets = returns(rewards, cfg.beta);
        if (!rets.empty()) mean += rets.front();
      }
      return_history->push_back(episodes.empty() ? 0.0
                                                 : mean / double(episodes.size()));
    }
  }
  return params;
}

double grad_check(const PolicyParams& params,
                  std::span<const WeightedTrajectory> batch, double epsilon) {
  PolicyParams grad;
  loss_and_grad(params, batch, grad);

  PolicyParams probe = params;
  double max_rel = 0.0;
  const std::vector<std::pair<std::vector<double>*, std::vector<double>*>>
      tensors = {{&probe.W_L, &grad.W_L}, {&probe.W_s, &grad.W_s},
                 {&probe.W_h, &grad.W_h}, {&probe.b, &grad.b},
                 {&probe.W_o, &grad.W_o}, {&probe.b_o, &grad.b_o}};
  for (auto [pv, gv] : tensors) {
    for (size_t i = 0; i < pv->size(); ++i) {
      double saved = (*pv)[i];
      (*pv)[i] = saved + epsilon;
      double up = loss_only(probe, batch);
      (*pv)[i] = saved - epsilon;
      double down = loss_only(probe, batch);
      (*pv)[i] = saved;
      double fd = (up - down) / (2.0 * epsilon);
      double an = (*gv)[i];
      double denom = std::max(std::abs(fd) + std::abs(an), 1e-8);
      max_rel = std::max(max_rel, std::abs(fd - an) / denom);
    }
  }
  return max_rel;
}

std::string params_to_json(const PolicyParams& params) {
  nlohmann::json j;
  j["format"] = "viewcap-policy";
  j["version"] = 1;
  j["dims"] = {{"n_categories", params.dims.n_categories},
               {"bow_dim", params.dims.bow_dim},
               {"embed_dim", params.dims.embed_dim},
               {"hidden", params.dims.hidden},
               {"n_actions", params.dims.n_actions}};
  j["W_L"] = params.W_L;
  j["W_s"] = params.W_s;
  j["W_h"] = params.W_h;
  j["b"] = params.b;
  j["W_o"] = params.W_o;
  j["b_o"] = params.b_o;
  return j.dump();
}

PolicyParams params_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("params", e.what());
  }
  PolicyParams p;
  try {
    if (j.at("format").get<std::string>() != "viewcap-policy")
      throw ParseError("params.format", "not a viewcap policy checkpoint");
    const auto& d = j.at("dims");
    p.dims.n_categories = d.at("n_categories").get<int>();
    p.dims.bow_dim = d.at("bow_dim").get<int>();
    p.dims.embed_dim = d.at("embed_dim").get<int>();
    p.dims.hidden = d.at("hidden").get<int>();
    p.dims.n_actions = d.at("n_actions").get<int>();
    p.W_L = j.at("W_L").get<std::vector<double>>();
    p.W_s = j.at("W_s").get<std::vector<double>>();
    p.W_h = j.at("W_h").get<std::vector<double>>();
    p.b = j.at("b").get<std::vector<double>>();
    p.W_o = j.at("W_o").get<std::vector<double>>();
    p.b_o = j.at("b_o").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("params", e.what());
  }
  check_shapes(p);
  return p;
}

std::string episode_to_json(const Episode& ep) {
  nlohmann::json j;
  j["scene_id"] = ep.scene_id;
  j["termination"] =
      ep.termination == Termination::Stopped ? "stopped" : "horizon";
  j["nos"] = ep.nos();
  j["sol"] = ep.final_score;
  j["start_score"] = ep.start_score;
  j["final_pose"] = {ep.final_pose.x, ep.final_pose.y, ep.final_pose.h};
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& st : ep.steps) {
    Action a = action_from_index(st.step.action);
    steps.push_back({{"pose", {st.pose.x, st.pose.y, st.pose.h}},
                     {"caption", st.obs.caption},
                     {"action", {a.move, a.rot}},
                     {"logp", st.logp},
                     {"reward", st.reward},
                     {"score", st.score}});
  }
  j["steps"] = steps;
  return j.dump(2);
}

}  // namespace viewcap
