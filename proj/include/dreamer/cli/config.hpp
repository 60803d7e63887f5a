#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dreamer/behavior/behavior.hpp"
#include "dreamer/envs/env.hpp"
#include "dreamer/runtime/loops.hpp"
#include "dreamer/wm/world_model.hpp"

namespace dreamer::cli {

// Flat key space grouped into sections for the on-disk format. Unknown keys
// are rejected by name; defaults match the published hyperparameter table.
struct RunConfig {
  // run
  std::string env = "point_nav";
  uint64_t seed = 0;
  int64_t steps = 0;  // learner-step budget for training; 0 = unbounded
  std::string runtime = "concurrent";  // concurrent | lockstep
  float control_rate_hz = 20.0f;
  // replay
  int64_t replay_capacity = 1000000;
  int64_t start_learning = 10000;
  int batch_size = 32;
  int batch_length = 32;
  // model
  int rssm_size = 512;
  int latents = 32;
  int classes = 32;
  int mlp_layers = 4;
  int mlp_units = 512;
  std::string activation = "layernorm_elu";  // layernorm_elu | elu
  int embed_units = 1024;
  int conv_depth = 48;
  int image_size = 64;
  float kl_balance = 0.8f;
  float kl_scale = 1.0f;
  float kl_free = 0.0f;
  std::string reward_alignment = "successor";  // successor | origin
  // actor_critic
  int horizon = 15;
  float discount = 0.95f;
  float return_lambda = 0.95f;
  int target_interval = 100;
  float eta = 3e-4f;
  bool baseline_target_critic = true;
  int imagine_starts = 0;
  // optimizer
  float grad_clip = 100.0f;
  float lr = 1e-4f;
  float adam_eps = 1e-6f;
  // runtime
  float cutoff_hz = 0.0f;  // 0 = control_rate / 5
  int publish_every = 1;
  bool checkpoint_replay = true;
  // env
  bool upright_unit_range = false;
  int env_grid = 8;
  int env_objects = 3;
  bool env_depth = false;
  bool env_tint = false;
  int env_episode_limit = 0;
  int env_episode_steps = 100;
  float env_goal_x = 0.5f;
  float env_goal_y = 0.5f;

  // Schema-driven access. Throws std::invalid_argument naming the key for
  // unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static const std::vector<std::pair<std::string, std::string>>& schema();  // (section, key)

  std::string serialize() const;
  static RunConfig parse_text(const std::string& text);
  static RunConfig parse_file(const std::string& path);
  void apply_overrides(const std::vector<std::string>& overrides);  // "key=value"

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);

  bool operator==(const RunConfig& other) const;

  // Factory wiring.
  wm::WorldModelConfig world_config() const;
  behavior::BehaviorConfig behavior_config() const;
  runtime::RuntimeConfig runtime_config() const;
  envs::EnvParams env_params() const;
  std::unique_ptr<envs::Env> build_env(uint64_t env_seed) const;
};

}  // namespace dreamer::cli
