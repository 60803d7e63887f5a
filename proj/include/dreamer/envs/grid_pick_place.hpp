#pragma once

#include <vector>

#include "dreamer/envs/env.hpp"

namespace dreamer::envs {

// Two adjacent bins on a discrete grid, a gripper, and N objects. Sparse
// rewards: +1 for grasping, -1 for releasing in the same bin, +10 for
// carrying into the opposite bin, where the gripper opens automatically.
// Vertical moves are enabled only while holding, and a held object can cross
// the divider only while raised. Observations are a flat-color rendering plus
// a proprioceptive vector (gripper cell, height, holding flag).
class GridPickPlaceEnv : public Env {
 public:
  GridPickPlaceEnv(const EnvParams& params, uint64_t seed);

  const SpaceSpec& space() const override { return spec_; }
  Observation reset() override;
  StepResult step(const Action& action) override;

  // Color shift applied to the rendering mid-run (visual adaptation test).
  void set_tint_shift(bool on) { tint_ = on; }
  bool tint_shift() const { return tint_; }

  int grid_size() const { return gw_; }
  int object_count() const { return static_cast<int>(objects_.size()); }

  struct ObjectState {
    int x = 0, y = 0;
  };
  const std::vector<ObjectState>& objects() const { return objects_; }
  int gripper_x() const { return gx_; }
  int gripper_y() const { return gy_; }
  int gripper_z() const { return gz_; }
  int holding() const { return holding_; }

  // Counters for evaluation and acceptance checks.
  int64_t grasp_events() const { return grasps_; }
  int64_t placement_events() const { return placements_; }
  int64_t release_events() const { return releases_; }

  bool supports_state_io() const override { return true; }
  void save_state(std::ostream& os) const override;
  void load_state(std::istream& is) override;

 private:
  int bin_of(int x) const { return x < gw_ ? 0 : 1; }
  Observation observe() const;
  void render(ImageBuf& img) const;

  SpaceSpec spec_;
  Rng rng_;
  int gw_ = 8, gh_ = 8;     // per-bin grid
  int image_size_ = 64;
  bool depth_ = false;
  bool tint_ = false;
  int episode_limit_ = 0;
  int steps_ = 0;

  int gx_ = 0, gy_ = 0, gz_ = 0;
  int holding_ = -1;
  int grasp_bin_ = 0;
  std::vector<ObjectState> objects_;

  int64_t grasps_ = 0, placements_ = 0, releases_ = 0;
};

}  // namespace dreamer::envs
