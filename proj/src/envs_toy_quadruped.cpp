#include "dreamer/envs/toy_quadruped.hpp"

#include <algorithm>
#include <cmath>

#include "dreamer/core/serialize.hpp"

namespace dreamer::envs {

namespace {
constexpr float kPi = 3.14159265f;
constexpr float kLag = 0.25f;          // joint first-order lag
constexpr float kActionScale = 1.5f;   // action [-1,1] -> target angle [rad]
constexpr float kAsymThreshold = 0.6f;
constexpr float kPoseStand = 0.4f;     // mean |q - stand| below this holds upright
constexpr float kPoseCollapse = 0.6f;
constexpr int kTeeterSteps = 12;

float pose_error(const std::array<float, 12>& q) {
  float err = 0.0f;
  for (int i = 0; i < 4; ++i) err += std::abs(q[static_cast<size_t>(i)] + 0.2f);
  for (int i = 4; i < 8; ++i) err += std::abs(q[static_cast<size_t>(i)] + 0.2f);
  for (int i = 8; i < 12; ++i) err += std::abs(q[static_cast<size_t>(i)] - 1.0f);
  return err / 12.0f;
}

}  // namespace

ToyQuadrupedEnv::ToyQuadrupedEnv(const EnvParams& params, uint64_t seed) {
  (void)seed;  // dynamics are deterministic; randomness not needed
  upright_unit_range_ = detail::param_bool(params, "upright_unit_range", false);
  episode_limit_ = detail::param_int(params, "episode_limit", 0);
  spec_.modalities.push_back({"state", ModalitySpec::Kind::vec, {18}});
  spec_.action = ActionSpec::make_continuous(12, -kActionScale, kActionScale);
  update_body();
}

Observation ToyQuadrupedEnv::reset() {
  steps_ = 0;
  mode_ = Mode::supine;
  asym_streak_ = 0;
  teeter_timer_ = 0;
  q_.fill(0.0f);
  q_target_.fill(0.0f);
  theta_ = kPi;
  gait_prev_ = 0.0f;
  gait_amp_ = 0.0f;
  vx_ = 0.0f;
  update_body();
  return observe();
}

StepResult ToyQuadrupedEnv::step(const Action& action) {
  for (int i = 0; i < 12; ++i)
    q_target_[static_cast<size_t>(i)] = kActionScale * action.values[static_cast<size_t>(i)];
  for (int i = 0; i < 12; ++i)
    q_[static_cast<size_t>(i)] += kLag * (q_target_[static_cast<size_t>(i)] - q_[static_cast<size_t>(i)]);

  const float asym = (q_[0] + q_[1]) - (q_[2] + q_[3]);
  const float err = pose_error(q_);

  switch (mode_) {
    case Mode::supine:
      theta_ = std::min(kPi, theta_ + 0.1f * (kPi - theta_));
      asym_streak_ = std::abs(asym) > kAsymThreshold ? asym_streak_ + 1 : 0;
      if (asym_streak_ >= 3) {
        mode_ = Mode::rolling;
        asym_streak_ = 0;
      }
      break;
    case Mode::rolling:
      theta_ += 0.3f * (1.0f - theta_);
      if (theta_ < 1.05f) {
        mode_ = Mode::teeter;
        teeter_timer_ = kTeeterSteps;
      }
      break;
    case Mode::teeter:
      if (err < kPoseStand) {
        mode_ = Mode::standing;
      } else if (--teeter_timer_ <= 0) {
        mode_ = Mode::supine;
      }
      break;
    case Mode::standing:
      theta_ += 0.3f * (0.0f - theta_);
      if (err > kPoseCollapse) mode_ = Mode::supine;
      break;
  }

  // Gait: alternating diagonal knee pairs pump the forward velocity once the
  // body is upright and near the standing pose.
  const float gait = (q_[8] + q_[11]) - (q_[9] + q_[10]);
  gait_amp_ = 0.85f * gait_amp_ + 0.15f * std::abs(gait - gait_prev_);
  gait_prev_ = gait;
  const bool can_walk = mode_ == Mode::standing && theta_ < 0.25f && err < kPoseStand;
  const float v_target = can_walk ? 4.0f * gait_amp_ : 0.0f;
  vx_ += 0.3f * (v_target - vx_);

  update_body();
  StepResult out;
  out.obs = observe();
  out.reward = a1_reward(body_, upright_unit_range_).total;
  ++steps_;
  out.is_last = episode_limit_ > 0 && steps_ >= episode_limit_;
  return out;
}

void ToyQuadrupedEnv::save_state(std::ostream& os) const {
  io::write_u32(os, static_cast<uint32_t>(steps_));
  io::write_u32(os, static_cast<uint32_t>(mode_));
  io::write_i64(os, asym_streak_);
  io::write_i64(os, teeter_timer_);
  for (float v : q_) io::write_f32(os, v);
  for (float v : q_target_) io::write_f32(os, v);
  for (float v : {theta_, gait_prev_, gait_amp_, vx_}) io::write_f32(os, v);
}

void ToyQuadrupedEnv::load_state(std::istream& is) {
  steps_ = static_cast<int>(io::read_u32(is));
  mode_ = static_cast<Mode>(io::read_u32(is));
  asym_streak_ = static_cast<int>(io::read_i64(is));
  teeter_timer_ = static_cast<int>(io::read_i64(is));
  for (auto& v : q_) v = io::read_f32(is);
  for (auto& v : q_target_) v = io::read_f32(is);
  theta_ = io::read_f32(is);
  gait_prev_ = io::read_f32(is);
  gait_amp_ = io::read_f32(is);
  vx_ = io::read_f32(is);
  update_body();
}

void ToyQuadrupedEnv::update_body() {
  body_.up = {std::sin(theta_), 0.0f, std::cos(theta_)};
  for (int i = 0; i < 4; ++i) {
    body_.q_hip[static_cast<size_t>(i)] = q_[static_cast<size_t>(i)];
    body_.q_shoulder[static_cast<size_t>(i)] = q_[static_cast<size_t>(i + 4)];
    body_.q_knee[static_cast<size_t>(i)] = q_[static_cast<size_t>(i + 8)];
  }
  body_.velocity = {vx_, 0.0f, 0.0f};
}

Observation ToyQuadrupedEnv::observe() const {
  Observation obs;
  VecBuf vec;
  vec.values.reserve(18);
  for (float v : body_.up) vec.values.push_back(v);
  for (float v : q_) vec.values.push_back(v);
  for (float v : body_.velocity) vec.values.push_back(v);
  obs.entries.emplace("state", std::move(vec));
  return obs;
}

Action ToyQuadrupedEnv::scripted_action(int step_index) const {
  (void)step_index;
  Action a;
  a.kind = ActionSpec::Kind::continuous;
  a.values.assign(12, 0.0f);
  auto set_stand = [&] {
    for (int i = 0; i < 8; ++i) a.values[static_cast<size_t>(i)] = -0.2f / kActionScale;
    for (int i = 8; i < 12; ++i) a.values[static_cast<size_t>(i)] = 1.0f / kActionScale;
  };
  if (mode_ == Mode::supine || mode_ == Mode::rolling) {
    // Split the hip pairs to roll; keep the rest neutral.
    a.values[0] = a.values[1] = 0.9f;
    a.values[2] = a.values[3] = -0.9f;
  } else if (mode_ == Mode::teeter) {
    set_stand();
  } else {
    set_stand();
    // Alternate the diagonal knee pairs around the standing angle.
    const float swing = (steps_ % 2 == 0 ? 1.0f : -1.0f) * 0.1f / kActionScale;
    a.values[8] += swing;
    a.values[11] += swing;
    a.values[9] -= swing;
    a.values[10] -= swing;
  }
  return a;
}

}  // namespace dreamer::envs
