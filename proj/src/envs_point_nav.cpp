#include "dreamer/envs/point_nav.hpp"

#include <algorithm>
#include <cmath>

#include "dreamer/core/serialize.hpp"

namespace dreamer::envs {

namespace {
constexpr float kThrust = 0.012f;
constexpr float kTurn = 0.25f;
constexpr float kDrag = 0.9f;
constexpr float kTurnDrag = 0.8f;
constexpr float kMargin = 0.0f;
}  // namespace

PointNavEnv::PointNavEnv(const EnvParams& params, uint64_t seed) : rng_(seed) {
  image_size_ = detail::param_int(params, "image_size", 64);
  episode_steps_ = detail::param_int(params, "episode_steps", 100);
  goal_x_ = detail::param_float(params, "goal_x", 0.5f);
  goal_y_ = detail::param_float(params, "goal_y", 0.5f);
  spec_.modalities.push_back({"image", ModalitySpec::Kind::image, {image_size_, image_size_, 3}});
  spec_.action = ActionSpec::make_continuous(2, -1.0f, 1.0f);
  px_ = detail::param_float(params, "start_x", rng_.uniform(kMargin, 1.0f - kMargin));
  py_ = detail::param_float(params, "start_y", rng_.uniform(kMargin, 1.0f - kMargin));
  heading_ = rng_.uniform(0.0f, 6.2831853f);
}

void PointNavEnv::integrate(float left, float right) {
  const float thrust = 0.5f * (left + right);
  const float torque = 0.5f * (right - left);
  omega_ = kTurnDrag * omega_ + kTurn * torque;
  heading_ += omega_;
  vx_ = kDrag * vx_ + kThrust * thrust * std::cos(heading_);
  vy_ = kDrag * vy_ + kThrust * thrust * std::sin(heading_);
  px_ += vx_;
  py_ += vy_;
  if (px_ < kMargin) { px_ = kMargin; vx_ = 0.0f; }
  if (px_ > 1.0f - kMargin) { px_ = 1.0f - kMargin; vx_ = 0.0f; }
  if (py_ < kMargin) { py_ = kMargin; vy_ = 0.0f; }
  if (py_ > 1.0f - kMargin) { py_ = 1.0f - kMargin; vy_ = 0.0f; }
}

Observation PointNavEnv::reset() {
  steps_ = 0;
  // Scramble the pose with a burst of random full-power motor commands.
  for (int i = 0; i < 40; ++i)
    integrate(rng_.uniform(-1.0f, 1.0f), rng_.uniform(-1.0f, 1.0f));
  return observe();
}

StepResult PointNavEnv::step(const Action& action) {
  integrate(action.values[0], action.values[1]);
  ++steps_;
  StepResult out;
  out.obs = observe();
  out.reward = -distance_to_goal();
  out.is_last = steps_ >= episode_steps_;
  if (out.is_last) steps_ = 0;
  return out;
}

void PointNavEnv::save_state(std::ostream& os) const {
  io::write_u64(os, rng_.state());
  io::write_u32(os, static_cast<uint32_t>(steps_));
  for (float v : {px_, py_, vx_, vy_, heading_, omega_}) io::write_f32(os, v);
}

void PointNavEnv::load_state(std::istream& is) {
  rng_.set_state(io::read_u64(is));
  steps_ = static_cast<int>(io::read_u32(is));
  px_ = io::read_f32(is);
  py_ = io::read_f32(is);
  vx_ = io::read_f32(is);
  vy_ = io::read_f32(is);
  heading_ = io::read_f32(is);
  omega_ = io::read_f32(is);
}

float PointNavEnv::distance_to_goal() const {
  const float dx = px_ - goal_x_;
  const float dy = py_ - goal_y_;
  return std::sqrt(dx * dx + dy * dy);
}

Observation PointNavEnv::observe() const {
  const int s = image_size_;
  ImageBuf img;
  img.h = s;
  img.w = s;
  img.c = 3;
  img.pixels.assign(static_cast<size_t>(s) * s * 3, 0);
  auto put = [&](int px, int py, uint8_t r, uint8_t g, uint8_t b) {
    if (px < 0 || px >= s || py < 0 || py >= s) return;
    const size_t base = (static_cast<size_t>(py) * s + px) * 3;
    img.pixels[base] = r;
    img.pixels[base + 1] = g;
    img.pixels[base + 2] = b;
  };
  for (int y = 0; y < s; ++y)
    for (int x = 0; x < s; ++x) put(x, y, 18, 18, 24);

  // Goal marker: fixed green square.
  const int gx = static_cast<int>(goal_x_ * (s - 1));
  const int gy = static_cast<int>(goal_y_ * (s - 1));
  const int gr = std::max(1, s / 14);
  for (int dy = -gr; dy <= gr; ++dy)
    for (int dx = -gr; dx <= gr; ++dx) put(gx + dx, gy + dy, 40, 200, 80);

  // Agent: filled circle, rotationally symmetric so heading is not decodable
  // from a single frame.
  const int ax = static_cast<int>(px_ * (s - 1));
  const int ay = static_cast<int>(py_ * (s - 1));
  const int ar = std::max(2, s / 10);
  for (int dy = -ar; dy <= ar; ++dy)
    for (int dx = -ar; dx <= ar; ++dx)
      if (dx * dx + dy * dy <= ar * ar) put(ax + dx, ay + dy, 235, 235, 235);

  Observation obs;
  obs.entries.emplace("image", std::move(img));
  return obs;
}

}  // namespace dreamer::envs
