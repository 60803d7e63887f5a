#pragma once

#include <memory>
#include <vector>

#include "dreamer/wm/world_model.hpp"

namespace dreamer::behavior {

struct BehaviorConfig {
  int horizon = 15;
  float discount = 0.95f;
  float return_lambda = 0.95f;
  float eta = 3e-4f;  // entropy scale
  int target_interval = 100;
  float lr = 1e-4f;
  float adam_eps = 1e-6f;
  float grad_clip = 100.0f;
  bool baseline_target_critic = true;  // advantage baseline from the target copy
  int mlp_layers = 4;
  int mlp_units = 512;
  bool layer_norm = true;
  int imagine_starts = 0;  // subsample of start states; 0 = use all
};

// Latent rollout under the current policy. Values are detached copies; when
// built differentiably (reparameterized continuous actions) the tape and the
// node ids stay alive so the actor loss can extend the same graph.
struct ImaginedRollout {
  int n = 0;
  int horizon = 0;
  std::vector<net::Tensor> h, z;          // horizon+1 states
  std::vector<net::Tensor> actions;       // horizon, encoded [N, adim]
  std::vector<std::vector<int>> action_idx;  // discrete only
  net::Tensor rewards;  // [horizon, N] reward head on the step's target state
  net::Tensor values;   // [horizon+1, N] target critic

  std::shared_ptr<net::Tape> tape;  // differentiable mode only
  std::vector<int> id_reward;       // horizon
  std::vector<int> id_value;        // horizon+1
  std::vector<int> id_log_prob;     // horizon
  net::ParamVars actor_vars, world_vars;
};

// Backward recursion V_t = r_t + gamma * ((1 - lambda) * v_{t+1} +
// lambda * V_{t+1}), V_H = v_H. Computed in double.
std::vector<double> lambda_returns(const std::vector<double>& rewards,
                                   const std::vector<double>& values, double gamma, double lambda);

struct LossGraph {
  std::shared_ptr<net::Tape> tape;
  int loss = -1;
  net::ParamVars actor_vars, critic_vars, world_vars;
  float value() const { return tape->value(loss).data[0]; }
};

struct BehaviorTrainResult {
  bool applied = false;
  std::string error;
  std::map<std::string, float> metrics;
};

// Actor-critic over imagined latent rollouts: Reinforce gradients for
// discrete action spaces, reparameterized pathwise gradients for continuous
// ones, entropy regularization, and a periodically copied target critic.
// None of the losses update world-model parameters.
class Behavior {
 public:
  Behavior(int feature_dim, ActionSpec action, BehaviorConfig cfg, uint64_t seed);

  const BehaviorConfig& config() const { return cfg_; }
  const net::ParamSet& actor_params() const { return actor_; }
  net::ParamSet& actor_params() { return actor_; }
  const net::ParamSet& critic_params() const { return critic_; }
  net::ParamSet& critic_params() { return critic_; }
  const net::ParamSet& target_params() const { return target_; }
  net::ParamSet& target_params() { return target_; }
  int64_t critic_updates() const { return critic_updates_; }
  void set_critic_updates(int64_t n) { critic_updates_ = n; }

  // Value-level policy for the actor thread and evaluation.
  Action sample_action(const LatentState& s, Rng& rng, bool mode) const;

  // Actor head output for one batch of features, on the given tape.
  int build_actor_head(net::Tape& t, const net::ParamVars& v, int feat) const;
  int build_critic_head(net::Tape& t, const net::ParamVars& v, int feat) const;  // [N]

  ImaginedRollout imagine(const wm::WorldModel& wm, const LatentState& starts, int horizon,
                          Rng& rng, bool differentiable) const;

  // Returns matrix [H, N] computed in double from the rollout's rewards and
  // target-critic values.
  net::Tensor lambda_returns_batch(const net::Tensor& rewards, const net::Tensor& values) const;

  // MSE between the online critic and stop-gradient returns over t in [0, H).
  LossGraph critic_loss_graph(const wm::WorldModel& wm, const ImaginedRollout& rollout,
                              const net::Tensor& returns) const;
  // Reinforce with stop-gradient advantage plus entropy bonus.
  LossGraph actor_loss_discrete_graph(const wm::WorldModel& wm, const ImaginedRollout& rollout,
                                      const net::Tensor& returns) const;
  // Pathwise objective on the rollout's own tape; world model and critic are
  // frozen leaves there, so only actor parameters receive gradients.
  int actor_loss_reparam_graph(ImaginedRollout& rollout) const;

  void target_update();  // hard copy critic -> target

  // Checkpoint restore; names and shapes must match.
  void adopt_params(net::ParamSet actor, net::ParamSet critic, net::ParamSet target);

  BehaviorTrainResult train_step(const wm::WorldModel& wm, const LatentState& starts, Rng& rng);

  // Critic evaluation over every rollout state, [horizon+1, N].
  net::Tensor eval_critic_values(const ImaginedRollout& rollout, const net::ParamSet& which) const;

 private:
  net::MlpSpec actor_spec() const;
  net::MlpSpec critic_spec() const;
  LatentState subsample_starts(const LatentState& starts, Rng& rng) const;

  int feature_dim_;
  ActionSpec action_;
  BehaviorConfig cfg_;
  net::ParamSet actor_, critic_, target_;
  int64_t critic_updates_ = 0;
};

}  // namespace dreamer::behavior
