#include "dreamer/net/params.hpp"

#include <cmath>
#include <stdexcept>

namespace dreamer::net {

Tensor& ParamSet::add(const std::string& name, Tensor init) {
  auto [it, inserted] = params_.emplace(name, std::move(init));
  if (!inserted) throw std::logic_error("duplicate parameter '" + name + "'");
  m_.emplace(name, Tensor(it->second.shape));
  v_.emplace(name, Tensor(it->second.shape));
  return it->second;
}

Tensor& ParamSet::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("no parameter '" + name + "'");
  return it->second;
}

const Tensor& ParamSet::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("no parameter '" + name + "'");
  return it->second;
}

int64_t ParamSet::numel() const {
  int64_t n = 0;
  for (const auto& [name, t] : params_) n += t.numel();
  return n;
}

bool ParamSet::finite() const {
  for (const auto& [name, t] : params_)
    if (!t.finite()) return false;
  return true;
}

void ParamSet::copy_values_from(const ParamSet& other) {
  for (auto& [name, t] : params_) {
    const Tensor& src = other.at(name);
    if (!t.same_shape(src)) throw std::logic_error("shape mismatch copying '" + name + "'");
    t.data = src.data;
  }
}

float clip_by_global_norm(GradMap& grads, float max_norm) {
  double sq = 0.0;
  for (const auto& [name, g] : grads) sq += static_cast<double>(g.arr().square().sum());
  const float norm = static_cast<float>(std::sqrt(sq));
  if (norm > max_norm && norm > 0.0f) {
    const float s = max_norm / norm;
    for (auto& [name, g] : grads) g.arr() *= s;
  }
  return norm;
}

ParamSet::StepResult ParamSet::adam_step(const GradMap& grads, float lr, float eps,
                                         float clip_norm, float beta1, float beta2) {
  StepResult result;
  for (const auto& [name, g] : grads) {
    if (!params_.count(name)) return {false, "gradient for unknown parameter '" + name + "'", 0.0f};
    if (!g.same_shape(params_.at(name)))
      return {false, "gradient shape mismatch for '" + name + "'", 0.0f};
    if (!g.finite()) return {false, "non-finite gradient for '" + name + "'", 0.0f};
  }
  GradMap clipped = grads;
  result.grad_norm = clip_by_global_norm(clipped, clip_norm);

  ++adam_t_;
  const float bc1 = 1.0f - std::pow(beta1, static_cast<float>(adam_t_));
  const float bc2 = 1.0f - std::pow(beta2, static_cast<float>(adam_t_));
  for (auto& [name, g] : clipped) {
    Tensor& p = params_.at(name);
    Tensor& m = m_.at(name);
    Tensor& v = v_.at(name);
    m.arr() = beta1 * m.arr() + (1.0f - beta1) * g.arr();
    v.arr() = beta2 * v.arr() + (1.0f - beta2) * g.arr().square();
    p.arr() -= lr * (m.arr() / bc1) / ((v.arr() / bc2).sqrt() + eps);
  }
  ++version_;
  result.applied = true;
  return result;
}

int ParamVars::at(const std::string& name) const {
  auto it = ids.find(name);
  if (it == ids.end()) throw std::out_of_range("parameter '" + name + "' not registered");
  return it->second;
}

ParamVars register_params(Tape& tape, const ParamSet& params, bool trainable) {
  ParamVars vars;
  for (const auto& [name, t] : params.tensors()) vars.ids[name] = tape.leaf(&t, trainable);
  return vars;
}

GradMap harvest_grads(Tape& tape, const ParamSet& params, const ParamVars& vars) {
  GradMap grads;
  for (const auto& [name, t] : params.tensors()) {
    int id = vars.at(name);
    if (tape.has_grad(id)) {
      grads.emplace(name, tape.grad(id));
    } else {
      grads.emplace(name, Tensor(t.shape));
    }
  }
  return grads;
}

Tensor variance_scaled_uniform(std::vector<int> shape, int fan_in, int fan_out, Rng& rng) {
  Tensor t(std::move(shape));
  const float bound = std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
  for (auto& v : t.data) v = rng.uniform(-bound, bound);
  return t;
}

Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

}  // namespace dreamer::net
