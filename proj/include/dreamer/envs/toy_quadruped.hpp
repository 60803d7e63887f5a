#pragma once

#include "dreamer/envs/a1_reward.hpp"
#include "dreamer/envs/env.hpp"

namespace dreamer::envs {

// Desk-scale stand-in for the quadruped: 12 target joint angles realized by
// first-order lag, a body-attitude state machine (supine / rolling / teeter /
// standing) driven by hip asymmetry and pose error, and a forward velocity
// driven by an alternating knee gait once upright. The reward is a1_reward on
// the resulting body state. Reset-free: is_last fires only when an episode
// limit is configured for evaluation.
class ToyQuadrupedEnv : public Env {
 public:
  ToyQuadrupedEnv(const EnvParams& params, uint64_t seed);

  const SpaceSpec& space() const override { return spec_; }
  Observation reset() override;
  StepResult step(const Action& action) override;

  const QuadrupedState& body() const { return body_; }

  // Joint-angle targets of the hand-written controller that solves the task;
  // used as the scripted-policy fixture in tests.
  Action scripted_action(int step_index) const;

  bool supports_state_io() const override { return true; }
  void save_state(std::ostream& os) const override;
  void load_state(std::istream& is) override;

 private:
  void update_body();
  Observation observe() const;

  SpaceSpec spec_;
  bool upright_unit_range_;
  int episode_limit_;
  int steps_ = 0;

  enum class Mode { supine, rolling, teeter, standing };
  Mode mode_ = Mode::supine;
  int asym_streak_ = 0;
  int teeter_timer_ = 0;

  std::array<float, 12> q_{};        // hip[4], shoulder[4], knee[4]
  std::array<float, 12> q_target_{};
  float theta_ = 3.14159265f;  // angle between body up and world up
  float gait_prev_ = 0.0f;
  float gait_amp_ = 0.0f;
  float vx_ = 0.0f;
  QuadrupedState body_;
};

}  // namespace dreamer::envs
