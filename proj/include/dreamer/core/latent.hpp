#pragma once

#include "dreamer/net/tensor.hpp"

namespace dreamer {

// Batched model state: deterministic recurrent part h plus stochastic
// categorical code z stored as flattened one-hot blocks (latents x classes).
// The concatenation [h, z] is the feature every head consumes.
struct LatentState {
  net::Tensor h;  // [N, rssm]
  net::Tensor z;  // [N, latents * classes]

  int n() const { return h.rows(); }
};

// Prior and posterior logits for the same step, [N, latents * classes].
struct DistPair {
  net::Tensor prior_logits;
  net::Tensor post_logits;
};

}  // namespace dreamer
