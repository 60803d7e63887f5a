#include "dreamer/envs/a1_reward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dreamer::envs {

namespace {

float l1_offset(const std::array<float, 4>& q, float target) {
  float sum = 0.0f;
  for (float v : q) sum += std::abs(v - target);
  return sum;
}

float clipf(float v, float lo, float hi) { return std::min(std::max(v, lo), hi); }

}  // namespace

A1RewardResult a1_reward(const QuadrupedState& state, bool upright_unit_range) {
  const float norm = std::sqrt(state.up[0] * state.up[0] + state.up[1] * state.up[1] +
                               state.up[2] * state.up[2]);
  if (std::abs(norm - 1.0f) > 1e-3f)
    throw std::invalid_argument("up vector must be unit length");

  A1RewardResult r;
  const float up_z = state.up[2];
  r.terms[0] = upright_unit_range ? (up_z + 1.0f) / 2.0f : (up_z - 1.0f) / 2.0f;
  r.terms[1] = 1.0f - 0.25f * l1_offset(state.q_hip, -0.2f);
  r.terms[2] = 1.0f - 0.25f * l1_offset(state.q_shoulder, -0.2f);
  r.terms[3] = 1.0f - 0.25f * l1_offset(state.q_knee, 1.0f);

  const float speed = std::sqrt(state.velocity[0] * state.velocity[0] +
                                state.velocity[1] * state.velocity[1] +
                                state.velocity[2] * state.velocity[2]);
  const float vx = state.velocity[0];
  const float ratio = speed < 1e-6f ? 0.0f : std::max(0.0f, vx) / speed;
  r.terms[4] = 5.0f * (ratio * clipf(vx / 0.3f, -1.0f, 1.0f) + 1.0f);

  // Satisfaction levels used for gating; the velocity term gates nothing.
  const std::array<float, 4> satisfaction{
      (up_z + 1.0f) / 2.0f,
      clipf(r.terms[1], 0.0f, 1.0f),
      clipf(r.terms[2], 0.0f, 1.0f),
      clipf(r.terms[3], 0.0f, 1.0f),
  };

  bool open = true;
  for (int i = 0; i < 5; ++i) {
    r.gates[static_cast<size_t>(i)] = open;
    if (open) r.total += r.terms[static_cast<size_t>(i)];
    if (i < 4 && satisfaction[static_cast<size_t>(i)] < 0.7f) open = false;
  }
  return r;
}

}  // namespace dreamer::envs
