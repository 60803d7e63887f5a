#pragma once

#include <cmath>
#include <cstdint>

namespace dreamer {

// Deterministic counter-based generator (SplitMix64). Every stochastic
// component owns its own stream so runs are reproducible across platforms
// and trivially serializable as a single 64-bit state.
class Rng {
 public:
  Rng() : state_(0x9E3779B97F4A7C15ULL) {}
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  float uniform(float lo, float hi) { return lo + (hi - lo) * static_cast<float>(next_double()); }

  // Uniform integer in [0, n).
  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

  int64_t uniform_int64(int64_t n) {
    return static_cast<int64_t>(next_u64() % static_cast<uint64_t>(n));
  }

  // Standard normal via Box-Muller. One draw consumes two uniforms; nothing
  // is cached so the state remains a single word.
  float normal() {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    return static_cast<float>(std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2));
  }

  // Derive an independent child stream without advancing this one.
  Rng child(uint64_t salt) const {
    Rng mixer(state_ ^ (salt * 0xD1B54A32D192ED03ULL + 0x2545F4914F6CDD1DULL));
    return Rng(mixer.next_u64());
  }

  uint64_t state() const { return state_; }
  void set_state(uint64_t s) { state_ = s; }

 private:
  uint64_t state_;
};

}  // namespace dreamer
