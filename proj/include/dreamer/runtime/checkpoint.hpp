#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "dreamer/runtime/loops.hpp"

namespace dreamer::runtime {

inline constexpr int kCheckpointFormatVersion = 1;

// Everything a run needs to continue exactly where it stopped: model and
// policy parameters with optimizer moments, replay contents, the actor's
// carried state, environment state (when supported), and caller metadata.
// The layout is canonical, so save -> load -> save is byte-identical.
struct CheckpointContents {
  const wm::WorldModel* world = nullptr;
  const behavior::Behavior* policy = nullptr;
  const ReplayBuffer* replay = nullptr;        // optional
  const ActorDriver* actor = nullptr;          // optional
  const LearnerDriver* learner = nullptr;      // optional
  const envs::Env* env = nullptr;              // optional, needs state io
  int64_t learner_iterations = 0;
  nlohmann::json meta;                         // caller-owned (config echo etc.)
};

void save_checkpoint(const std::string& dir, const CheckpointContents& contents);

struct LoadedCheckpoint {
  SpaceSpec spec;
  net::ParamSet world_params;
  net::ParamSet actor_params, critic_params, target_params;
  int64_t critic_updates = 0;
  int64_t learner_iterations = 0;
  std::optional<ReplayBuffer> replay;
  bool has_actor_state = false;
  bool has_learner_state = false;
  bool has_env_state = false;
  nlohmann::json meta;

  // Deferred blobs; consumed by restore_actor / restore_env.
  std::string actor_state_path;
  std::string learner_state_path;
  std::string env_state_path;
};

// Reads the checkpoint and verifies it against the expected space; throws on
// format-version or spec mismatch.
LoadedCheckpoint load_checkpoint(const std::string& dir, const SpaceSpec& expected_spec);

void restore_actor(const LoadedCheckpoint& ckpt, ActorDriver& actor);
void restore_learner(const LoadedCheckpoint& ckpt, LearnerDriver& learner);
void restore_env(const LoadedCheckpoint& ckpt, envs::Env& env);

}  // namespace dreamer::runtime
