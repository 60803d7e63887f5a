#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "dreamer/core/rng.hpp"
#include "dreamer/net/tensor.hpp"

namespace dreamer::testutil {

inline net::Tensor random_tensor(std::vector<int> shape, Rng& rng, float scale = 1.0f) {
  net::Tensor t(std::move(shape));
  for (auto& v : t.data) v = rng.uniform(-scale, scale);
  return t;
}

// Central-difference gradient of a scalar function of one tensor.
inline net::Tensor finite_difference(const std::function<double(const net::Tensor&)>& f,
                                     const net::Tensor& x, double h) {
  net::Tensor grad(x.shape);
  net::Tensor probe = x;
  for (size_t i = 0; i < x.data.size(); ++i) {
    const float orig = probe.data[i];
    probe.data[i] = orig + static_cast<float>(h);
    const double up = f(probe);
    probe.data[i] = orig - static_cast<float>(h);
    const double down = f(probe);
    probe.data[i] = orig;
    grad.data[i] = static_cast<float>((up - down) / (2.0 * h));
  }
  return grad;
}

// Relative error between gradient vectors, measured in the L2 norm.
inline double grad_rel_error(const net::Tensor& a, const net::Tensor& b) {
  double diff = 0.0, ref = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    diff += d * d;
    ref += static_cast<double>(b.data[i]) * b.data[i];
  }
  if (ref == 0.0) return std::sqrt(diff);
  return std::sqrt(diff / ref);
}

}  // namespace dreamer::testutil
