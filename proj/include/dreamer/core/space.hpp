#pragma once

#include <string>
#include <vector>

namespace dreamer {

// Declares one named observation modality: an image tensor or a flat vector.
struct ModalitySpec {
  enum class Kind { image, vec };

  std::string name;
  Kind kind = Kind::vec;
  std::vector<int> shape;  // image: {h, w, c}; vec: {dim}

  int64_t numel() const;
};

struct ActionSpec {
  enum class Kind { continuous, discrete };

  Kind kind = Kind::continuous;
  int dim = 0;              // continuous
  std::vector<float> low;   // continuous, physical units per element
  std::vector<float> high;  // continuous
  int n = 0;                // discrete

  static ActionSpec make_continuous(int dim, float low, float high);
  static ActionSpec make_discrete(int n);

  // Width of the action once encoded for network input (one-hot for discrete).
  int encoded_dim() const { return kind == Kind::continuous ? dim : n; }
};

// Full observation/action space of an environment.
struct SpaceSpec {
  std::vector<ModalitySpec> modalities;
  ActionSpec action;

  const ModalitySpec* find(const std::string& name) const;
  bool has_image() const;

  // Throws std::invalid_argument if any structural invariant is violated
  // (non-positive shapes, low >= high, discrete n < 2).
  void check() const;

  bool operator==(const SpaceSpec& other) const;
};

// Canonical agent-side action: continuous values live in [-1, 1]^dim and are
// scaled to [low, high] inside the environment; discrete actions are an index.
// The null action (episode starts) is the zero vector / index -1, both of
// which encode to an all-zero network input.
struct Action {
  ActionSpec::Kind kind = ActionSpec::Kind::continuous;
  std::vector<float> values;  // continuous
  int index = -1;             // discrete; -1 designates the null action

  static Action null_for(const ActionSpec& spec);
  bool is_null(const ActionSpec& spec) const;
};

}  // namespace dreamer
