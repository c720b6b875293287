#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "viewcap/errors.hpp"
#include "viewcap/policy.hpp"
#include "viewcap/rng.hpp"

using namespace viewcap;

namespace {

const Lexicon& lex() {
  static Lexicon l = build_lexicon(13);
  return l;
}

NoiseConfig annotation() {
  NoiseConfig n;
  n.episode_seed = 1;
  return n;
}

std::vector<Scene> small_scenes(int count, std::uint64_t seed) {
  std::vector<Scene> scenes;
  const char* rooms[] = {"living_room", "kitchen", "bedroom", "bathroom"};
  for (int i = 0; i < count; ++i) {
    SceneGenConfig cfg;
    cfg.width = 9;
    cfg.height = 9;
    cfg.room_type = rooms[i % 4];
    scenes.push_back(generate_scene(cfg, seed + std::uint64_t(i)));
  }
  return scenes;
}

// Random probe trajectories with a tiny hidden state for gradient checks.
std::vector<WeightedTrajectory> probe_batch(const PolicyDims& dims, int n_traj,
                                            int steps, bool weighted,
                                            std::uint64_t seed) {
  Rng rng(seed);
  std::vector<WeightedTrajectory> batch;
  for (int k = 0; k < n_traj; ++k) {
    WeightedTrajectory traj;
    for (int t = 0; t < steps; ++t) {
      WeightedStep st;
      st.histogram.resize(size_t(dims.n_categories));
      for (double& x : st.histogram)
        x = rng.bernoulli(0.3) ? rng.uniform01() : 0.0;
      st.bow_counts.assign(size_t(dims.bow_dim), 0.0);
      for (int i = 0; i < 4; ++i)
        st.bow_counts[rng.below(std::uint64_t(dims.bow_dim))] += 1.0;
      int feasible = 0;
      for (int a = 0; a < dims.n_actions; ++a) {
        st.mask[size_t(a)] = a == 0 || rng.bernoulli(0.6);
        feasible += st.mask[size_t(a)];
      }
      do {
        st.action = int(rng.below(std::uint64_t(dims.n_actions)));
      } while (!st.mask[size_t(st.action)]);
      st.coeff = weighted ? 2.0 * rng.uniform01() - 1.0 : 1.0;
      traj.push_back(std::move(st));
    }
    batch.push_back(std::move(traj));
  }
  return batch;
}

PolicyDims probe_dims() {
  PolicyDims d;
  d.n_categories = 6;
  d.bow_dim = 10;
  d.embed_dim = 4;
  d.hidden = 8;
  d.n_actions = kNumActions;
  return d;
}

std::vector<double> state_of(const PolicyParams& p, const WeightedStep& st) {
  std::vector<double> state(size_t(p.dims.state_dim()), 0.0);
  std::copy(st.histogram.begin(), st.histogram.end(), state.begin());
  for (int r = 0; r < p.dims.embed_dim; ++r) {
    double acc = 0.0;
    for (int c = 0; c < p.dims.bow_dim; ++c)
      acc += p.W_L[size_t(r) * size_t(p.dims.bow_dim) + size_t(c)] *
             st.bow_counts[size_t(c)];
    state[size_t(p.dims.n_categories + r)] = acc;
  }
  return state;
}

}  // namespace

TEST_CASE("state vector layout and max rule") {
  PolicyParams p = init_params(dims_for(lex()), 3);
  Observation obs;
  obs.detections = {{"couch", 0.3, {}}, {"couch", 0.7, {}}, {"table", 0.2, {}}};
  obs.caption = {"a", "living_room", "with", "a", "couch"};
  auto s = state_vector(obs, p, lex());
  CHECK(int(s.size()) == lex().category_count() + 16);
  int couch_slot = lex().category_slot("couch");
  int table_slot = lex().category_slot("table");
  CHECK(s[size_t(couch_slot)] == doctest::Approx(0.7));  // max, not sum
  CHECK(s[size_t(table_slot)] == doctest::Approx(0.2));

  Observation empty;
  empty.caption = {};
  auto z = state_vector(empty, p, lex());
  for (double x : z) CHECK(x == 0.0);
}

TEST_CASE("masked softmax properties") {
  PolicyDims d = probe_dims();
  PolicyParams zero = init_params(d, 1);
  zero.zero();
  std::vector<double> h(size_t(d.hidden), 0.0);
  std::vector<double> s(size_t(d.state_dim()), 0.0);

  ActionMask mask{};
  for (int a = 0; a < 10; ++a) mask[size_t(a)] = true;
  auto res = policy_step(zero, h, s, mask);
  double sum = 0.0;
  for (int a = 0; a < d.n_actions; ++a) {
    if (a < 10)
      CHECK(res.probs[size_t(a)] == doctest::Approx(0.1).epsilon(1e-12));
    else
      CHECK(res.probs[size_t(a)] == 0.0);
    sum += res.probs[size_t(a)];
  }
  CHECK(std::abs(sum - 1.0) <= 1e-12);

  ActionMask one{};
  one[13] = true;
  auto single = policy_step(zero, h, s, one);
  CHECK(single.probs[13] == doctest::Approx(1.0));

  ActionMask none{};
  CHECK_THROWS_AS((void)policy_step(zero, h, s, none), EmptyMask);

  // invariance to a constant shift of every logit
  PolicyParams shifted = init_params(d, 7);
  PolicyParams plain = shifted;
  for (double& x : shifted.b_o) x += 3.17;
  ActionMask many{};
  for (int a = 0; a < d.n_actions; a += 2) many[size_t(a)] = true;
  Rng rng(5);
  for (double& x : s) x = rng.uniform01();
  auto a1 = policy_step(plain, h, s, many);
  auto a2 = policy_step(shifted, h, s, many);
  for (int a = 0; a < d.n_actions; ++a)
    CHECK(a1.probs[size_t(a)] == doctest::Approx(a2.probs[size_t(a)]).epsilon(1e-12));
}

TEST_CASE("uniform policy loss is log of the feasible count") {
  PolicyDims d = probe_dims();
  PolicyParams zero = init_params(d, 1);
  zero.zero();
  auto batch = probe_batch(d, 1, 1, false, 11);
  int feasible = 0;
  for (bool m : batch[0][0].mask) feasible += m;
  double loss = loss_only(zero, batch);
  CHECK(loss == doctest::Approx(std::log(double(feasible))));
}

TEST_CASE("loss is non-negative for unweighted batches") {
  PolicyDims d = probe_dims();
  Rng rng(3);
  for (int k = 0; k < 10; ++k) {
    PolicyParams p = init_params(d, rng.next_u64());
    auto batch = probe_batch(d, 2, 4, false, rng.next_u64());
    CHECK(loss_only(p, batch) >= 0.0);
  }
}

TEST_CASE("bptt gradient matches finite differences") {
  PolicyDims d = probe_dims();
  PolicyParams p = init_params(d, 99);
  auto batch = probe_batch(d, 2, 5, false, 42);
  double err = grad_check(p, batch, 1e-5);
  CHECK(err < 1e-4);

  // the policy-gradient surrogate (weighted coefficients) as well
  auto weighted = probe_batch(d, 2, 5, true, 43);
  double werr = grad_check(p, weighted, 1e-5);
  CHECK(werr < 1e-4);

  // consistency: the error shrinks with epsilon
  double coarse = grad_check(p, batch, 1e-4);
  double fine = grad_check(p, batch, 1e-5);
  CHECK(fine <= coarse * 10.0);  // same order or better

  // zero-length batch has zero gradient
  std::vector<WeightedTrajectory> none;
  PolicyParams g;
  double l0 = loss_and_grad(p, none, g);
  CHECK(l0 == 0.0);
  for (double x : g.W_s) CHECK(x == 0.0);
}

TEST_CASE("il loss on real demos replays deterministically") {
  auto scenes = small_scenes(2, 600);
  ScoringConfig sc = scoring_for(lex());
  auto demos = make_demos(scenes, lex(), sc, annotation(), {}, 5);
  REQUIRE(!demos.empty());
  ReplayEnv env{scenes, lex(), annotation(), sc, {}};
  PolicyParams p = init_params(dims_for(lex(), 16), 1);
  auto [l1, g1] = il_loss_and_grad(p, demos, env);
  auto [l2, g2] = il_loss_and_grad(p, demos, env);
  CHECK(l1 == l2);
  CHECK(l1 > 0.0);
  CHECK(g1.W_s == g2.W_s);
  CHECK(g1.W_L == g2.W_L);
}

TEST_CASE("train_il drives the fixed-batch loss down") {
  auto scenes = small_scenes(2, 71);
  ScoringConfig sc = scoring_for(lex());
  DemoGenConfig dc;
  dc.per_scene = 3;
  auto demos = make_demos(scenes, lex(), sc, annotation(), dc, 9);
  REQUIRE(demos.size() >= 4);
  ReplayEnv env{scenes, lex(), annotation(), sc, {}};

  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.epochs = 0;
  PolicyParams p = init_params(dims_for(lex(), 8), 2);

  // epochs = 0 leaves parameters untouched
  PolicyParams same = train_il(p, demos, cfg, env);
  CHECK(same.W_s == p.W_s);

  // ten single-batch steps with lr 1e-3: loss non-increasing
  std::vector<WeightedTrajectory> batch;
  for (const auto& demo : demos) batch.push_back(replay_demo(demo, p, env));
  PolicyParams cur = p;
  double prev = loss_only(cur, batch);
  for (int step = 0; step < 10; ++step) {
    PolicyParams grad;
    std::vector<WeightedTrajectory> rebuilt;
    for (const auto& demo : demos) rebuilt.push_back(replay_demo(demo, cur, env));
    double loss = loss_and_grad(cur, rebuilt, grad);
    CHECK(loss <= prev + 1e-9);
    prev = loss;
    cur.axpy(-cfg.lr, grad);
  }

  // determinism of the full training loop
  TrainConfig t2;
  t2.epochs = 3;
  t2.seed = 77;
  PolicyParams a = train_il(p, demos, t2, env);
  PolicyParams b = train_il(p, demos, t2, env);
  CHECK(a.W_s == b.W_s);
  CHECK(a.W_o == b.W_o);
}

TEST_CASE("one-demo toy problem reaches full action agreement") {
  auto scenes = small_scenes(1, 3131);
  ScoringConfig sc = scoring_for(lex());
  DemoGenConfig dc;
  dc.per_scene = 1;
  auto demos = make_demos(scenes, lex(), sc, annotation(), dc, 21);
  REQUIRE(demos.size() == 1);
  ReplayEnv env{scenes, lex(), annotation(), sc, {}};

  PolicyParams p = init_params(dims_for(lex(), 8), 5);
  TrainConfig cfg;
  cfg.lr = 5e-2;
  cfg.epochs = 1;
  cfg.batch_size = 1;

  bool agreed = false;
  for (int step = 0; step < 500 && !agreed; ++step) {
    p = train_il(std::move(p), demos, cfg, env);
    // teacher-forced greedy agreement
    auto traj = replay_demo(demos[0], p, env);
    std::vector<double> h(size_t(p.dims.hidden), 0.0);
    agreed = true;
    for (const auto& st : traj) {
      auto res = policy_step(p, h, state_of(p, st), st.mask);
      h = res.hidden;
      int argmax = 0;
      for (int a = 1; a < p.dims.n_actions; ++a)
        if (res.probs[size_t(a)] > res.probs[size_t(argmax)]) argmax = a;
      if (argmax != st.action) {
        agreed = false;
        break;
      }
    }
  }
  CHECK(agreed);
}

TEST_CASE("returns arithmetic") {
  std::vector<double> r1 = {1, 0, 0};
  CHECK(returns(r1, 0.99)[0] == doctest::Approx(1.0));
  std::vector<double> r2 = {0, 0, 1};
  CHECK(returns(r2, 0.99)[0] == doctest::Approx(0.9801));
  std::vector<double> r3 = {0.3, -0.2, 0.5};
  auto zero_beta = returns(r3, 0.0);
  for (size_t i = 0; i < r3.size(); ++i) CHECK(zero_beta[i] == r3[i]);
}

TEST_CASE("rollout respects the horizon and stop semantics") {
  auto scenes = small_scenes(1, 808);
  const Scene& s = scenes[0];
  ScoringConfig sc = scoring_for(lex());
  TrainConfig cfg;
  NoiseConfig noise;
  noise.episode_seed = 4;

  // a policy with a huge Stop bias stops immediately
  PolicyParams stopper = init_params(dims_for(lex(), 8), 1);
  stopper.zero();
  stopper.b_o[size_t(action_index(kStop))] = 50.0;
  auto poses = enumerate_viewpoints(s);
  Episode ep = rollout(stopper, s, poses[10], lex(), noise, sc, cfg,
                       RolloutMode::Greedy, 3);
  CHECK(ep.termination == Termination::Stopped);
  CHECK(ep.steps.size() == 1);
  CHECK(ep.nos() == 0);
  CHECK(ep.final_pose == poses[10]);

  // any policy: length <= horizon
  Rng rng(6);
  for (int k = 0; k < 10; ++k) {
    PolicyParams p = init_params(dims_for(lex(), 8), rng.next_u64());
    Pose start = poses[rng.below(poses.size())];
    Episode e = rollout(p, s, start, lex(), noise, sc, cfg, RolloutMode::Sample,
                        rng.next_u64());
    CHECK(int(e.steps.size()) <= cfg.horizon);
    // greedy is deterministic
    Episode g1 = rollout(p, s, start, lex(), noise, sc, cfg, RolloutMode::Greedy, 1);
    Episode g2 = rollout(p, s, start, lex(), noise, sc, cfg, RolloutMode::Greedy, 2);
    CHECK(g1.final_pose == g2.final_pose);
    CHECK(g1.steps.size() == g2.steps.size());
  }
}

TEST_CASE("episode rewards telescope") {
  auto scenes = small_scenes(2, 335);
  ScoringConfig sc = scoring_for(lex());
  TrainConfig cfg;
  NoiseConfig noise;
  noise.episode_seed = 8;
  Rng rng(14);
  for (const auto& s : scenes) {
    auto poses = enumerate_viewpoints(s);
    for (int k = 0; k < 10; ++k) {
      PolicyParams p = init_params(dims_for(lex(), 8), rng.next_u64());
      Episode ep = rollout(p, s, poses[rng.below(poses.size())], lex(), noise,
                           sc, cfg, RolloutMode::Sample, rng.next_u64());
      double expected = (ep.final_score - cfg.rho * double(ep.steps.size())) -
                        ep.start_score;
      CHECK(ep.total_reward() == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("reinforce update moves probabilities the right way") {
  PolicyDims d = probe_dims();
  TrainConfig cfg;

  // all-zero advantages leave parameters untouched
  PolicyParams p = init_params(d, 21);
  auto scenes = small_scenes(1, 515);
  const Scene& s = scenes[0];
  NoiseConfig noise;
  ScoringConfig sc = scoring_for(lex());
  PolicyParams real = init_params(dims_for(lex(), 8), 2);
  auto poses = enumerate_viewpoints(s);
  Episode ep = rollout(real, s, poses[4], lex(), noise, sc, cfg,
                       RolloutMode::Sample, 5);
  std::vector<Episode> eps = {ep};
  // zero every reward so all advantages are zero with baseline 0
  for (auto& st : eps[0].steps) st.reward = 0.0;
  PolicyParams before = real;
  double baseline = reinforce_update(real, eps, 0.0, cfg);
  CHECK(real.W_o == before.W_o);
  CHECK(real.W_s == before.W_s);
  CHECK(baseline == doctest::Approx(0.0));

  // single-step positive advantage increases the taken action's probability
  Episode single = rollout(before, s, poses[4], lex(), noise, sc, cfg,
                           RolloutMode::Sample, 6);
  single.steps.resize(1);
  single.steps[0].reward = 1.0;
  PolicyParams updated = before;
  (void)reinforce_update(updated, std::vector<Episode>{single}, 0.0, cfg);

  const auto& st = single.steps[0];
  auto assemble = [&](const PolicyParams& pp) {
    std::vector<double> h(size_t(pp.dims.hidden), 0.0);
    return policy_step(pp, h, state_of(pp, st.step), st.step.mask)
        .probs[size_t(st.step.action)];
  };
  CHECK(assemble(updated) > assemble(before));

  // baseline ema arithmetic: first batch from zero
  TrainConfig bc;
  bc.baseline_decay = 0.9;
  Episode tiny = single;
  double nb = reinforce_update(updated, std::vector<Episode>{tiny}, 0.0, bc);
  auto rets = returns(std::vector<double>{tiny.steps[0].reward}, bc.beta);
  CHECK(nb == doctest::Approx(0.1 * rets[0]));
}

TEST_CASE("train_il detects divergence under an absurd learning rate") {
  auto scenes = small_scenes(1, 6161);
  ScoringConfig sc = scoring_for(lex());
  auto demos = make_demos(scenes, lex(), sc, annotation(), {}, 31);
  REQUIRE(!demos.empty());
  ReplayEnv env{scenes, lex(), annotation(), sc, {}};
  PolicyParams p = init_params(dims_for(lex(), 8), 4);
  TrainConfig cfg;
  cfg.lr = 1e305;
  cfg.epochs = 3;
  CHECK_THROWS_AS((void)train_il(p, demos, cfg, env), DivergenceDetected);
}

TEST_CASE("params json round trip") {
  PolicyParams p = init_params(dims_for(lex(), 8), 12);
  std::string text = params_to_json(p);
  PolicyParams back = params_from_json(text);
  CHECK(back.dims == p.dims);
  CHECK(back.W_L == p.W_L);
  CHECK(back.W_s == p.W_s);
  CHECK(back.W_h == p.W_h);
  CHECK(back.b == p.b);
  CHECK(back.W_o == p.W_o);
  CHECK(back.b_o == p.b_o);
  CHECK_THROWS_AS((void)params_from_json("{}"), ParseError);
}

TEST_CASE("train_rl runs deterministically at small scale") {
  auto scenes = small_scenes(2, 2020);
  ScoringConfig sc = scoring_for(lex());
  NoiseConfig noise;
  TrainConfig cfg;
  cfg.rl_iterations = 5;
  cfg.batch_size = 2;
  cfg.seed = 9;
  PolicyParams p = init_params(dims_for(lex(), 8), 3);
  PolicyParams a = train_rl(p, scenes, lex(), noise, sc, cfg);
  PolicyParams b = train_rl(p, scenes, lex(), noise, sc, cfg);
  CHECK(a.W_o == b.W_o);
  CHECK(a.finite());
}
