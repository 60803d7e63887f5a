#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "dreamer/core/space.hpp"

namespace dreamer {

// Images are kept as 8-bit per channel and normalized to [0, 1] only when a
// training batch is assembled; replay capacity is large enough that float
// storage would be prohibitive.
struct ImageBuf {
  int h = 0, w = 0, c = 0;
  std::vector<uint8_t> pixels;  // row-major h, w, c

  int64_t numel() const { return static_cast<int64_t>(h) * w * c; }
};

struct VecBuf {
  std::vector<float> values;
};

using ObsEntry = std::variant<ImageBuf, VecBuf>;

// Named bundle of sensor readings; ordered map keeps serialization canonical.
struct Observation {
  std::map<std::string, ObsEntry> entries;

  const ImageBuf& image(const std::string& name) const;
  const VecBuf& vec(const std::string& name) const;
  bool operator==(const Observation& other) const;
};

// One environment step. `action` is the action that preceded (led into) this
// observation; episode starts carry the null action and zero reward.
struct Transition {
  Observation obs;
  Action action;
  float reward = 0.0f;
  bool is_first = false;
  bool is_last = false;
};

struct ValidationResult {
  enum class Kind { ok, shape_mismatch, out_of_range, non_finite };

  Kind kind = Kind::ok;
  std::string detail;  // names the offending modality or field

  bool ok() const { return kind == Kind::ok; }
};

ValidationResult validate_observation(const Observation& obs, const SpaceSpec& spec);
ValidationResult validate_action(const Action& a, const ActionSpec& spec, bool allow_null);
ValidationResult validate_transition(const Transition& t, const SpaceSpec& spec);

}  // namespace dreamer
