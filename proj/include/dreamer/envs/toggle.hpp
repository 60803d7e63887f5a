#pragma once

#include "dreamer/envs/env.hpp"

namespace dreamer::envs {

// Two-state synthetic environment: the observed bit flips every step,
// independent of the action. The open-loop prediction accuracy of this bit is
// a direct probe of the dynamics model.
class ToggleEnv : public Env {
 public:
  explicit ToggleEnv(const EnvParams& params, uint64_t seed);

  const SpaceSpec& space() const override { return spec_; }
  Observation reset() override;
  StepResult step(const Action& action) override;

  int bit() const { return bit_; }

  bool supports_state_io() const override { return true; }
  void save_state(std::ostream& os) const override;
  void load_state(std::istream& is) override;

 private:
  Observation observe() const;

  SpaceSpec spec_;
  int bit_ = 0;
  int episode_limit_ = 0;
  int steps_ = 0;
};

}  // namespace dreamer::envs
