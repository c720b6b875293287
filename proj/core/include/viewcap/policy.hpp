#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "viewcap/demogen.hpp"
#include "viewcap/scoring.hpp"

namespace viewcap {

struct PolicyDims {
  int n_categories = 0;  // detection histogram size (N)
  int bow_dim = 0;       // non-stop vocabulary size
  int embed_dim = 16;    // language embedding rows of W_L
  int hidden = 64;       // recurrent state size
  int n_actions = kNumActions;
  int state_dim() const { return n_categories + embed_dim; }

  friend bool operator==(const PolicyDims&, const PolicyDims&) = default;
};

inline PolicyDims dims_for(const Lexicon& lex, int hidden = 64) {
  return {lex.category_count(), lex.bow_dim(), 16, hidden, kNumActions};
}

// All trainable parameters, double precision, row-major matrices.
struct PolicyParams {
  PolicyDims dims;
  std::vector<double> W_L;  // embed_dim x bow_dim
  std::vector<double> W_s;  // hidden x state_dim
  std::vector<double> W_h;  // hidden x hidden
  std::vector<double> b;    // hidden
  std::vector<double> W_o;  // n_actions x hidden
  std::vector<double> b_o;  // n_actions

  void zero();
  bool finite() const;
  // params += scale * other (matching shapes)
  void axpy(double scale, const PolicyParams& other);
};

// Uniform init in [-0.1, 0.1], zero biases; deterministic per seed.
PolicyParams init_params(const PolicyDims& dims, std::uint64_t seed);

std::string params_to_json(const PolicyParams& params);
PolicyParams params_from_json(const std::string& text);

// s_t: per-category max detection confidence, then W_L * bow(caption).
std::vector<double> state_vector(const Observation& obs,
                                 const PolicyParams& params,
                                 const Lexicon& lex);

struct PolicyStepResult {
  std::vector<double> hidden;
  std::vector<double> probs;  // masked softmax, exactly 0 where infeasible
};

// h_t = tanh(W_s s + W_h h_prev + b); probs = softmax(W_o h_t + b_o)
// restricted to feasible actions. Throws EmptyMask.
PolicyStepResult policy_step(const PolicyParams& params,
                             std::span<const double> h_prev,
                             std::span<const double> state,
                             const ActionMask& mask);

// One decision point of a trajectory as seen by the loss: the inputs that
// do not depend on the parameters (histogram + bag of words), the
// feasibility mask, the taken action, and the loss weight of its -log pi
// term (1 for imitation, advantage for the policy-gradient surrogate).
struct WeightedStep {
  std::vector<double> histogram;
  std::vector<double> bow_counts;
  ActionMask mask{};
  int action = 0;
  double coeff = 1.0;
};
using WeightedTrajectory = std::vector<WeightedStep>;

// loss = sum_t coeff_t * (-log pi(a_t)); gradient by full backpropagation
// through time. Trajectories are unrolled from a zero hidden state.
double loss_and_grad(const PolicyParams& params,
                     std::span<const WeightedTrajectory> batch,
                     PolicyParams& grad);
double loss_only(const PolicyParams& params,
                 std::span<const WeightedTrajectory> batch);

// Environment needed to replay demonstrations into observations.
struct ReplayEnv {
  std::span<const Scene> scenes;
  const Lexicon& lex;
  NoiseConfig noise;       // episode_seed acts as the base stream key
  ScoringConfig scoring;
  Visibility vis;
  const Scene& scene(std::uint64_t id) const;
};

WeightedTrajectory replay_demo(const Demonstration& demo,
                               const PolicyParams& params,
                               const ReplayEnv& env);

// Eq-style imitation loss over a batch of demonstrations: summed negative
// log-likelihood of the demonstrated actions, teacher-forced.
std::pair<double, PolicyParams> il_loss_and_grad(
    const PolicyParams& params, std::span<const Demonstration> demos,
    const ReplayEnv& env);

struct TrainConfig {
  double lr = 1e-3;
  double beta = 0.99;           // return discount
  double rho = 0.01;            // per-step score penalty
  int horizon = 40;             // T
  double baseline_decay = 0.9;  // moving-average baseline
  int batch_size = 8;           // K trajectories per update
  int epochs = 40;              // imitation passes over the demo set
  int rl_iterations = 150;      // policy-gradient updates
  std::uint64_t seed = 0;
  bool clip_gradients = false;  // off by default; divergence guard instead
  double clip_norm = 5.0;
};

// Plain SGD over shuffled demo batches. Throws DivergenceDetected when the
// loss stops being finite. Returns per-epoch mean losses via `history`.
PolicyParams train_il(PolicyParams params, std::span<const Demonstration> demos,
                      const TrainConfig& cfg, const ReplayEnv& env,
                      std::vector<double>* history = nullptr);

enum class RolloutMode { Sample, Greedy };
enum class Termination { Stopped, HorizonReached };

struct EpisodeStep {
  Pose pose;             // pose the action was chosen from
  Observation obs;
  WeightedStep step;     // histogram/bow/mask/action (coeff filled later)
  double logp = 0.0;
  double reward = 0.0;
  double score = 0.0;    // viewpoint score at `pose`
};

struct Episode {
  std::uint64_t scene_id = 0;
  std::vector<EpisodeStep> steps;
  Termination termination = Termination::Stopped;
  Pose final_pose;
  double final_score = 0.0;  // SoL
  double start_score = 0.0;

  int nos() const;  // composite actions before Stop (T when no Stop)
  double total_reward() const;
};

// Unroll the policy from a zero hidden state; per-step reward is the change
// of p_t = viewpoint_score - rho * t, with the start observation as the
// baseline. Terminates on Stop or after `horizon` actions.
Episode rollout(const PolicyParams& params, const Scene& scene, Pose start,
                const Lexicon& lex, const NoiseConfig& noise,
                const ScoringConfig& scoring, const TrainConfig& cfg,
                RolloutMode mode, std::uint64_t seed,
                const Visibility& vis = {});

// Discounted returns by reverse accumulation.
std::vector<double> returns(std::span<const double> rewards, double beta);

// One REINFORCE ascent step on sum_t log pi(a_t) * (R_t - baseline); the
// baseline is then updated as an exponential moving average of the mean
// episode return. Returns the new baseline.
double reinforce_update(PolicyParams& params, std::span<const Episode> episodes,
                        double baseline, const TrainConfig& cfg);

// Policy-gradient fine-tuning loop over the training scenes.
PolicyParams train_rl(PolicyParams params, std::span<const Scene> scenes,
                      const Lexicon& lex, const NoiseConfig& noise,
                      const ScoringConfig& scoring, const TrainConfig& cfg,
                      std::vector<double>* return_history = nullptr,
                      const Visibility& vis = {});

// Max relative error between the BPTT gradient and central finite
// differences over every parameter. Meant for small probe configurations.
double grad_check(const PolicyParams& params,
                  std::span<const WeightedTrajectory> batch,
                  double epsilon = 1e-5);

std::string episode_to_json(const Episode& episode);

}  // namespace viewcap
