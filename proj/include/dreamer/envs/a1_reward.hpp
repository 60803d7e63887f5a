#pragma once

#include <array>

namespace dreamer::envs {

// Body state of the quadruped as the reward function sees it.
struct QuadrupedState {
  std::array<float, 3> up{0.0f, 0.0f, 1.0f};  // body-frame up axis in world frame, unit norm
  std::array<float, 4> q_hip{};
  std::array<float, 4> q_shoulder{};
  std::array<float, 4> q_knee{};
  std::array<float, 3> velocity{};  // body frame, x forward (m/s)
};

struct A1RewardResult {
  float total = 0.0f;
  std::array<float, 5> terms{};   // upright, hip, shoulder, knee, velocity
  std::array<bool, 5> gates{};    // whether each term was active
};

// Staged locomotion reward: upright, three standing-pose terms, and a forward
// velocity term. Each term is active only while every preceding term's
// satisfaction is at least 0.7; inactive terms contribute zero.
//
// With `upright_unit_range` false the upright term spans [-1, 0] and the
// maximum total is 13; with it true the term is shifted to [0, 1] and the
// maximum becomes 14. The gating satisfaction of the upright term is
// (up_z + 1) / 2 in both modes; pose terms gate on their value clipped to
// [0, 1].
//
// Throws std::invalid_argument when the up vector is not unit length.
A1RewardResult a1_reward(const QuadrupedState& state, bool upright_unit_range = false);

}  // namespace dreamer::envs
