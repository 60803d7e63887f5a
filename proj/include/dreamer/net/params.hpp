#pragma once

#include <map>
#include <optional>
#include <string>

#include "dreamer/core/rng.hpp"
#include "dreamer/net/tape.hpp"

namespace dreamer::net {

using GradMap = std::map<std::string, Tensor>;

// Named parameter tensors plus Adam moments. The version counter increments
// once per optimizer step; snapshots published to other threads are copies.
class ParamSet {
 public:
  Tensor& add(const std::string& name, Tensor init);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) > 0; }

  const std::map<std::string, Tensor>& tensors() const { return params_; }
  std::map<std::string, Tensor>& tensors() { return params_; }
  const std::map<std::string, Tensor>& adam_m() const { return m_; }
  const std::map<std::string, Tensor>& adam_v() const { return v_; }

  int64_t version() const { return version_; }
  int64_t adam_steps() const { return adam_t_; }
  int64_t numel() const;
  bool finite() const;

  // Copies every tensor of `other` into this set (shapes must match).
  void copy_values_from(const ParamSet& other);

  // Serialization of the full optimizer state (see checkpoint.hpp).
  friend void save_params(std::ostream& os, const ParamSet& p);
  friend ParamSet load_params(std::istream& is);

  struct StepResult {
    bool applied = false;
    std::string error;
    float grad_norm = 0.0f;
  };

  // Clipped Adam update with bias correction. Skips the step and reports when
  // any gradient is non-finite.
  StepResult adam_step(const GradMap& grads, float lr, float eps, float clip_norm,
                       float beta1 = 0.9f, float beta2 = 0.999f);

 private:
  std::map<std::string, Tensor> params_;
  std::map<std::string, Tensor> m_, v_;
  int64_t version_ = 0;
  int64_t adam_t_ = 0;
};

// Global L2-norm clip: if ||g|| > max_norm, every gradient is scaled by
// max_norm / ||g||. Returns the pre-clip norm.
float clip_by_global_norm(GradMap& grads, float max_norm);

// Registration of a ParamSet's tensors as tape leaves.
struct ParamVars {
  std::map<std::string, int> ids;
  int at(const std::string& name) const;
};

ParamVars register_params(Tape& tape, const ParamSet& params, bool trainable);

// Collects d(loss)/d(param) after backward; missing grads come back as zeros
// so isolation audits can check every parameter explicitly.
GradMap harvest_grads(Tape& tape, const ParamSet& params, const ParamVars& vars);

// Initializers.
Tensor variance_scaled_uniform(std::vector<int> shape, int fan_in, int fan_out, Rng& rng);
Tensor zeros(std::vector<int> shape);

}  // namespace dreamer::net
