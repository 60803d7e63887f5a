#pragma once

#include "dreamer/envs/env.hpp"

namespace dreamer::envs {

// Image-only navigation in a unit square. Two torque-like motor commands
// drive an under-actuated body: their sum accelerates along the heading,
// their difference turns it, and both velocity and angular velocity carry
// momentum. The agent marker is rotationally symmetric, so heading must be
// inferred from history. Reward is the negative distance to a fixed goal in
// units of the area size; episodes end after a fixed step count and resets
// scramble the state with a burst of random high-power actions.
class PointNavEnv : public Env {
 public:
  PointNavEnv(const EnvParams& params, uint64_t seed);

  const SpaceSpec& space() const override { return spec_; }
  Observation reset() override;
  StepResult step(const Action& action) override;

  float distance_to_goal() const;
  float pos_x() const { return px_; }
  float pos_y() const { return py_; }
  void set_heading(float heading) { heading_ = heading; }  // symmetry checks

  bool supports_state_io() const override { return true; }
  void save_state(std::ostream& os) const override;
  void load_state(std::istream& is) override;

 private:
  void integrate(float left, float right);
  Observation observe() const;

  SpaceSpec spec_;
  Rng rng_;
  int image_size_ = 64;
  int episode_steps_ = 100;
  float goal_x_ = 0.5f, goal_y_ = 0.5f;
  int steps_ = 0;

  float px_ = 0.5f, py_ = 0.5f;
  float vx_ = 0.0f, vy_ = 0.0f;
  float heading_ = 0.0f;
  float omega_ = 0.0f;
};

}  // namespace dreamer::envs
