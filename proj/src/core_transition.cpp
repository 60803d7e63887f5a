#include "dreamer/core/transition.hpp"

#include <cmath>
#include <stdexcept>

namespace dreamer {

const ImageBuf& Observation::image(const std::string& name) const {
  auto it = entries.find(name);
  if (it == entries.end()) throw std::out_of_range("no modality '" + name + "'");
  return std::get<ImageBuf>(it->second);
}

const VecBuf& Observation::vec(const std::string& name) const {
  auto it = entries.find(name);
  if (it == entries.end()) throw std::out_of_range("no modality '" + name + "'");
  return std::get<VecBuf>(it->second);
}

bool Observation::operator==(const Observation& other) const {
  if (entries.size() != other.entries.size()) return false;
  for (const auto& [name, entry] : entries) {
    auto it = other.entries.find(name);
    if (it == other.entries.end()) return false;
    if (entry.index() != it->second.index()) return false;
    if (std::holds_alternative<ImageBuf>(entry)) {
      const auto& a = std::get<ImageBuf>(entry);
      const auto& b = std::get<ImageBuf>(it->second);
      if (a.h != b.h || a.w != b.w || a.c != b.c || a.pixels != b.pixels) return false;
    } else {
      if (std::get<VecBuf>(entry).values != std::get<VecBuf>(it->second).values) return false;
    }
  }
  return true;
}

ValidationResult validate_observation(const Observation& obs, const SpaceSpec& spec) {
  using Kind = ValidationResult::Kind;
  for (const auto& m : spec.modalities) {
    auto it = obs.entries.find(m.name);
    if (it == obs.entries.end())
      return {Kind::shape_mismatch, "missing modality '" + m.name + "'"};
    if (m.kind == ModalitySpec::Kind::image) {
      const auto* img = std::get_if<ImageBuf>(&it->second);
      if (!img) return {Kind::shape_mismatch, "modality '" + m.name + "' is not an image"};
      if (img->h != m.shape[0] || img->w != m.shape[1] || img->c != m.shape[2])
        return {Kind::shape_mismatch, "image shape mismatch in modality '" + m.name + "'"};
      if (static_cast<int64_t>(img->pixels.size()) != img->numel())
        return {Kind::shape_mismatch, "image buffer size mismatch in modality '" + m.name + "'"};
    } else {
      const auto* vec = std::get_if<VecBuf>(&it->second);
      if (!vec) return {Kind::shape_mismatch, "modality '" + m.name + "' is not a vector"};
      if (static_cast<int>(vec->values.size()) != m.shape[0])
        return {Kind::shape_mismatch, "vector shape mismatch in modality '" + m.name + "'"};
      for (float v : vec->values)
        if (!std::isfinite(v))
          return {Kind::non_finite, "non-finite value in modality '" + m.name + "'"};
    }
  }
  if (obs.entries.size() != spec.modalities.size())
    return {Kind::shape_mismatch, "observation has undeclared modalities"};
  return {};
}

ValidationResult validate_action(const Action& a, const ActionSpec& spec, bool allow_null) {
  using Kind = ValidationResult::Kind;
  if (a.kind != spec.kind) return {Kind::shape_mismatch, "action kind mismatch"};
  if (spec.kind == ActionSpec::Kind::continuous) {
    if (static_cast<int>(a.values.size()) != spec.dim)
      return {Kind::shape_mismatch, "action dim mismatch"};
    for (float v : a.values) {
      if (!std::isfinite(v)) return {Kind::non_finite, "non-finite action value"};
      if (v < -1.0f || v > 1.0f) return {Kind::out_of_range, "action value outside [-1, 1]"};
    }
  } else {
    if (a.index == -1) {
      if (!allow_null) return {Kind::out_of_range, "null action outside episode start"};
    } else if (a.index < 0 || a.index >= spec.n) {
      return {Kind::out_of_range, "discrete action index out of range"};
    }
  }
  return {};
}

ValidationResult validate_transition(const Transition& t, const SpaceSpec& spec) {
  using Kind = ValidationResult::Kind;
  auto obs_result = validate_observation(t.obs, spec);
  if (!obs_result.ok()) return obs_result;
  auto act_result = validate_action(t.action, spec.action, t.is_first);
  if (!act_result.ok()) return act_result;
  if (!std::isfinite(t.reward)) return {Kind::non_finite, "non-finite reward"};
  if (t.is_first) {
    if (!t.action.is_null(spec.action))
      return {Kind::out_of_range, "episode start must carry the null action"};
    if (t.reward != 0.0f) return {Kind::out_of_range, "episode start must carry zero reward"};
  }
  return {};
}

}  // namespace dreamer
