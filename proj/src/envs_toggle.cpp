#include "dreamer/envs/toggle.hpp"

#include "dreamer/core/serialize.hpp"

namespace dreamer::envs {

ToggleEnv::ToggleEnv(const EnvParams& params, uint64_t seed) {
  bit_ = static_cast<int>(seed % 2);
  episode_limit_ = detail::param_int(params, "episode_limit", 0);
  spec_.modalities.push_back({"bit", ModalitySpec::Kind::vec, {1}});
  spec_.action = ActionSpec::make_discrete(2);
}

Observation ToggleEnv::reset() {
  steps_ = 0;
  return observe();
}

StepResult ToggleEnv::step(const Action&) {
  bit_ ^= 1;
  ++steps_;
  StepResult out;
  out.obs = observe();
  out.reward = 0.0f;
  out.is_last = episode_limit_ > 0 && steps_ >= episode_limit_;
  return out;
}

void ToggleEnv::save_state(std::ostream& os) const {
  io::write_u32(os, static_cast<uint32_t>(bit_));
  io::write_u32(os, static_cast<uint32_t>(steps_));
}

void ToggleEnv::load_state(std::istream& is) {
  bit_ = static_cast<int>(io::read_u32(is));
  steps_ = static_cast<int>(io::read_u32(is));
}

Observation ToggleEnv::observe() const {
  Observation obs;
  VecBuf vec;
  vec.values = {static_cast<float>(bit_)};
  obs.entries.emplace("bit", std::move(vec));
  return obs;
}

}  // namespace dreamer::envs
