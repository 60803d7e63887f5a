#include "dreamer/core/space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dreamer {

int64_t ModalitySpec::numel() const {
  int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

ActionSpec ActionSpec::make_continuous(int dim, float low, float high) {
  ActionSpec s;
  s.kind = Kind::continuous;
  s.dim = dim;
  s.low.assign(dim, low);
  s.high.assign(dim, high);
  return s;
}

ActionSpec ActionSpec::make_discrete(int n) {
  ActionSpec s;
  s.kind = Kind::discrete;
  s.n = n;
  return s;
}

const ModalitySpec* SpaceSpec::find(const std::string& name) const {
  for (const auto& m : modalities)
    if (m.name == name) return &m;
  return nullptr;
}

bool SpaceSpec::has_image() const {
  return std::any_of(modalities.begin(), modalities.end(),
                     [](const ModalitySpec& m) { return m.kind == ModalitySpec::Kind::image; });
}

void SpaceSpec::check() const {
  for (const auto& m : modalities) {
    if (m.name.empty()) throw std::invalid_argument("modality with empty name");
    if (m.shape.empty()) throw std::invalid_argument("modality '" + m.name + "' has empty shape");
    for (int d : m.shape)
      if (d <= 0)
        throw std::invalid_argument("modality '" + m.name + "' has non-positive dimension");
    if (m.kind == ModalitySpec::Kind::image && m.shape.size() != 3)
      throw std::invalid_argument("image modality '" + m.name + "' must have shape {h, w, c}");
    if (m.kind == ModalitySpec::Kind::vec && m.shape.size() != 1)
      throw std::invalid_argument("vector modality '" + m.name + "' must have shape {dim}");
  }
  if (action.kind == ActionSpec::Kind::continuous) {
    if (action.dim <= 0) throw std::invalid_argument("continuous action dim must be positive");
    if (static_cast<int>(action.low.size()) != action.dim ||
        static_cast<int>(action.high.size()) != action.dim)
      throw std::invalid_argument("action bounds must match dim");
    for (int i = 0; i < action.dim; ++i)
      if (!(action.low[i] < action.high[i]))
        throw std::invalid_argument("action bound low >= high at index " + std::to_string(i));
  } else {
    if (action.n < 2) throw std::invalid_argument("discrete action space needs n >= 2");
  }
}

bool SpaceSpec::operator==(const SpaceSpec& other) const {
  if (modalities.size() != other.modalities.size()) return false;
  for (size_t i = 0; i < modalities.size(); ++i) {
    const auto& a = modalities[i];
    const auto& b = other.modalities[i];
    if (a.name != b.name || a.kind != b.kind || a.shape != b.shape) return false;
  }
  const auto& a = action;
  const auto& b = other.action;
  return a.kind == b.kind && a.dim == b.dim && a.n == b.n && a.low == b.low && a.high == b.high;
}

Action Action::null_for(const ActionSpec& spec) {
  Action a;
  a.kind = spec.kind;
  if (spec.kind == ActionSpec::Kind::continuous) {
    a.values.assign(spec.dim, 0.0f);
  } else {
    a.index = -1;
  }
  return a;
}

bool Action::is_null(const ActionSpec& spec) const {
  if (kind != spec.kind) return false;
  if (kind == ActionSpec::Kind::continuous) {
    if (static_cast<int>(values.size()) != spec.dim) return false;
    return std::all_of(values.begin(), values.end(), [](float v) { return v == 0.0f; });
  }
  return index == -1;
}

}  // namespace dreamer
