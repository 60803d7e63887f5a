#pragma once

#include <atomic>
#include <functional>
#include <optional>
#include <thread>

#include "dreamer/envs/env.hpp"
#include "dreamer/replay/replay_buffer.hpp"
#include "dreamer/runtime/filter.hpp"
#include "dreamer/runtime/metrics.hpp"
#include "dreamer/runtime/snapshot.hpp"

namespace dreamer::runtime {

struct RuntimeConfig {
  int batch_size = 32;
  int batch_length = 32;
  int64_t start_learning = 10000;  // random-action prefill threshold
  int64_t env_step_budget = 0;     // 0 = unbounded
  float control_rate_hz = 20.0f;
  float cutoff_hz = 0.0f;  // 0 = control_rate / 5
  int publish_every = 1;   // learner iterations per snapshot publication
};

// One environment interaction step at a time: belief update with the latest
// published snapshot, action sampling (uniform during prefill), low-pass
// filtering for continuous actions, and replay append. Never runs gradients.
class ActorDriver {
 public:
  ActorDriver(envs::Env& env, ReplayBuffer& replay, SnapshotSlot& slot,
              const RuntimeConfig& cfg, Rng rng, MetricsLogger* env_log,
              std::function<double()> now);

  void step();

  int64_t env_steps() const { return env_steps_; }
  int64_t episodes() const { return episodes_; }
  bool prefill_active() const;
  double max_action_compute_seconds() const { return max_compute_seconds_; }

  const LatentState& belief() const { return belief_; }

  void save_state(std::ostream& os) const;
  void load_state(std::istream& is);

 private:
  Action random_action();

  envs::Env& env_;
  ReplayBuffer& replay_;
  SnapshotSlot& slot_;
  RuntimeConfig cfg_;
  Rng rng_;
  MetricsLogger* env_log_;
  std::function<double()> now_;

  std::optional<LowPassFilter> filter_;
  Observation current_obs_;
  Action last_action_;
  LatentState belief_;
  bool fresh_ = true;
  bool first_flag_ = false;

  int64_t env_steps_ = 0;
  int64_t episodes_ = 0;
  float episode_return_ = 0.0f;
  int64_t episode_length_ = 0;
  double max_compute_seconds_ = 0.0;
};

// One gradient iteration at a time: sample a sequence batch, train the world
// model, train the actor-critic on the posterior states, publish a snapshot.
// Runs freely once the prefill threshold is met; there is no coupling to the
// environment step count.
class LearnerDriver {
 public:
  LearnerDriver(ReplayBuffer& replay, wm::WorldModel& world, behavior::Behavior& policy,
                SnapshotSlot& slot, const RuntimeConfig& cfg, Rng rng, MetricsLogger* train_log,
                std::function<double()> now);

  bool ready() const;
  bool step();  // returns false when not ready yet

  int64_t iterations() const { return iterations_; }
  int64_t skipped() const { return skipped_; }

  void publish_now();
  Rng& rng() { return rng_; }

  void save_state(std::ostream& os) const;
  void load_state(std::istream& is);

 private:
  ReplayBuffer& replay_;
  wm::WorldModel& world_;
  behavior::Behavior& policy_;
  SnapshotSlot& slot_;
  RuntimeConfig cfg_;
  Rng rng_;
  MetricsLogger* train_log_;
  std::function<double()> now_;

  int64_t iterations_ = 0;
  int64_t skipped_ = 0;
};

// Concurrent actor/learner runtime: two long-lived threads over the shared
// replay buffer and snapshot slot.
class Runtime {
 public:
  Runtime(envs::Env& env, ReplayBuffer& replay, wm::WorldModel& world,
          behavior::Behavior& policy, const RuntimeConfig& cfg, uint64_t seed,
          MetricsLogger* train_log, MetricsLogger* env_log);

  void start();
  void request_stop();
  void join();

  ActorDriver& actor() { return *actor_; }
  LearnerDriver& learner() { return *learner_; }
  SnapshotSlot& slot() { return slot_; }

  // Gradient work observed on the actor thread; must stay zero.
  int64_t actor_thread_backward_calls() const { return actor_backward_calls_; }

 private:
  envs::Env& env_;
  RuntimeConfig cfg_;
  SnapshotSlot slot_;
  std::unique_ptr<ActorDriver> actor_;
  std::unique_ptr<LearnerDriver> learner_;
  std::thread actor_thread_, learner_thread_;
  std::atomic<bool> stop_{false};
  std::atomic<int64_t> actor_backward_calls_{-1};
};

// Single-threaded deterministic interleaving of the same drivers, used by
// reproducibility tests and scripted experiments. Time is simulated from the
// environment step count, so logs are bit-identical across runs.
struct LockstepSchedule {
  int env_steps_per_round = 1;
  int learner_steps_per_round = 1;
};

class LockstepHarness {
 public:
  LockstepHarness(envs::Env& env, ReplayBuffer& replay, wm::WorldModel& world,
                  behavior::Behavior& policy, const RuntimeConfig& cfg,
                  const LockstepSchedule& schedule, uint64_t seed, MetricsLogger* train_log,
                  MetricsLogger* env_log);

  // Advances until the actor has taken `env_steps` total steps.
  void run_until_env_steps(int64_t env_steps);

  ActorDriver& actor() { return *actor_; }
  LearnerDriver& learner() { return *learner_; }
  SnapshotSlot& slot() { return slot_; }
  double sim_time() const;

 private:
  RuntimeConfig cfg_;
  LockstepSchedule schedule_;
  SnapshotSlot slot_;
  std::unique_ptr<ActorDriver> actor_;
  std::unique_ptr<LearnerDriver> learner_;
};

}  // namespace dreamer::runtime
