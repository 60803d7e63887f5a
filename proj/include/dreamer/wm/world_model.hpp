#pragma once

#include <map>
#include <memory>
#include <string>

#include "dreamer/core/latent.hpp"
#include "dreamer/core/rng.hpp"
#include "dreamer/core/transition.hpp"
#include "dreamer/net/modules.hpp"
#include "dreamer/replay/replay_buffer.hpp"

namespace dreamer::wm {

struct WorldModelConfig {
  int rssm = 512;
  int latents = 32;
  int classes = 32;
  int embed = 1024;
  int conv_depth = 48;
  int mlp_layers = 4;
  int mlp_units = 512;
  int vec_layers = 2;   // encoder/decoder blocks for vector modalities
  int head_layers = 1;  // prior/posterior logit heads
  bool layer_norm = true;
  float kl_balance = 0.8f;
  float kl_scale = 1.0f;
  float kl_free = 0.0f;  // free bits: per-branch batch-mean KL below this is not penalized
  float lr = 1e-4f;
  float adam_eps = 1e-6f;
  float grad_clip = 100.0f;
  // "successor": the reward observed with an observation is predicted from
  // that observation's own state (the state that resulted from the action).
  // "origin": predicted from the state one step earlier.
  std::string reward_alignment = "successor";

  int z_dim() const { return latents * classes; }
  int feature_dim() const { return rssm + z_dim(); }
};

// Training batch in network form. Rows are time-major: row = t * B + b, so a
// time slice is a contiguous row range.
struct BatchData {
  int B = 0, T = 0;
  std::map<std::string, net::Tensor> obs;  // [N, ...], images normalized to [0, 1]
  net::Tensor actions;                     // [N, action_dim] encoded
  net::Tensor rewards;                     // [N]
  std::vector<uint8_t> is_first;           // [N]

  int n() const { return B * T; }
};

BatchData make_batch_data(const SequenceBatch& batch, const SpaceSpec& spec);
net::Tensor encode_action(const Action& a, const ActionSpec& spec);
std::map<std::string, net::Tensor> obs_to_tensors(const Observation& obs, const SpaceSpec& spec);

struct ObserveOut {
  LatentState states;  // posterior states for all B*T rows
  DistPair dists;
  std::map<std::string, float> losses;  // "total" plus per-component entries

  // Alive only while training needs the graph.
  std::shared_ptr<net::Tape> tape;
  net::ParamVars vars;
  int total_id = -1;
};

struct WmTrainResult {
  bool applied = false;
  std::string error;
  std::map<std::string, float> metrics;
  LatentState starts;  // detached posterior states, imagination entry points
};

// Recurrent state-space world model: fused multi-modal encoder, shared
// deterministic recurrence with prior/posterior categorical codes, decoder
// and reward heads, trained jointly on replayed subsequences.
class WorldModel {
 public:
  WorldModel(SpaceSpec spec, WorldModelConfig cfg, uint64_t init_seed);

  const SpaceSpec& space() const { return spec_; }
  const WorldModelConfig& config() const { return cfg_; }
  const net::ParamSet& params() const { return params_; }
  net::ParamSet& params() { return params_; }
  int action_dim() const { return spec_.action.encoded_dim(); }

  // --- taped builders (single source of truth for the graph) ---
  int build_encoder(net::Tape& t, const net::ParamVars& v,
                    const std::map<std::string, int>& obs_ids, int n) const;
  struct StepIds {
    int h = -1, z = -1;
    int prior_logits = -1, post_logits = -1;
  };
  // Shared deterministic update. Resets rows flagged is_first to the learned
  // initial state before stepping; pass an empty mask when nothing resets.
  int build_h_step(net::Tape& t, const net::ParamVars& v, int h_prev, int z_prev, int a_prev,
                   const std::vector<uint8_t>& is_first, Rng& rng) const;
  StepIds build_posterior_step(net::Tape& t, const net::ParamVars& v, int h_prev, int z_prev,
                               int a_prev, int embed, const std::vector<uint8_t>& is_first,
                               Rng& rng) const;
  StepIds build_prior_step(net::Tape& t, const net::ParamVars& v, int h_prev, int z_prev,
                           int a_prev, const std::vector<uint8_t>& is_first, Rng& rng) const;
  int build_reward_head(net::Tape& t, const net::ParamVars& v, int feat) const;  // [N]
  std::map<std::string, int> build_decoder(net::Tape& t, const net::ParamVars& v, int feat,
                                           int n) const;
  // alpha * KL(sg(post) || prior) + (1 - alpha) * KL(post || sg(prior)),
  // summed over latent blocks; returns [N].
  int build_kl_balanced(net::Tape& t, int post_logits, int prior_logits) const;
  // Balanced KL with free-bits clamping on each branch's batch mean; the
  // scalar actually entering the training loss.
  int build_kl_loss(net::Tape& t, int post_logits, int prior_logits) const;

  // --- value-level API (no gradients; safe on a const snapshot) ---
  net::Tensor encode(const Observation& obs) const;  // [1, embed]
  LatentState initial_state(int n, Rng& rng) const;
  struct PosteriorOut {
    LatentState state;
    DistPair dists;
  };
  PosteriorOut posterior_step(const LatentState& prev, const net::Tensor& action_enc,
                              const net::Tensor& embed, const std::vector<uint8_t>& is_first,
                              Rng& rng) const;
  struct PriorOut {
    LatentState state;
    net::Tensor prior_logits;
  };
  PriorOut prior_step(const LatentState& prev, const net::Tensor& action_enc, Rng& rng) const;
  struct DecodeOut {
    std::map<std::string, net::Tensor> recon;  // [N, ...] float reconstructions
    net::Tensor reward;                        // [N]
  };
  DecodeOut decode(const LatentState& s) const;

  // Scalar kl_balanced for a single row pair, mostly for tests.
  float kl_balanced_value(const net::Tensor& post_logits, const net::Tensor& prior_logits) const;

  // Replace parameter values and optimizer state with a loaded set; names and
  // shapes must match exactly.
  void adopt_params(net::ParamSet loaded);

  // --- training ---
  ObserveOut observe(const BatchData& batch, Rng& rng, bool build_for_training = true) const;
  WmTrainResult train_step(const BatchData& batch, Rng& rng);

 private:
  void init_params(uint64_t seed);
  int conv_levels() const;

  SpaceSpec spec_;
  WorldModelConfig cfg_;
  net::ParamSet params_;
};

}  // namespace dreamer::wm
