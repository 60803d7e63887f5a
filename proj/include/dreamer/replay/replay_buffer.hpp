#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "dreamer/core/rng.hpp"
#include "dreamer/core/transition.hpp"

namespace dreamer {

// B contiguous length-T windows of experience, still in storage form.
// Training code decodes images to floats when it assembles network inputs.
struct SequenceBatch {
  int B = 0, T = 0;
  // seq[b][t]; shared with the buffer, transitions are immutable.
  std::vector<std::vector<std::shared_ptr<const Transition>>> seq;
};

struct ReplayStats {
  int64_t length = 0;
  int64_t total_appended = 0;
  int64_t episodes_seen = 0;  // completed episodes (is_last observed)
};

// FIFO transition store with one concurrent writer (actor) and one concurrent
// reader (learner). Slots hold shared_ptrs so the lock is only held for
// pointer copies, never payload copies.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int64_t capacity);

  ReplayBuffer(ReplayBuffer&& other) noexcept
      : capacity_(other.capacity_),
        ring_(std::move(other.ring_)),
        total_appended_(other.total_appended_),
        episodes_seen_(other.episodes_seen_) {}

  ReplayBuffer& operator=(ReplayBuffer&& other) noexcept {
    std::scoped_lock lock(mu_, other.mu_);
    capacity_ = other.capacity_;
    ring_ = std::move(other.ring_);
    total_appended_ = other.total_appended_;
    episodes_seen_ = other.episodes_seen_;
    return *this;
  }

  void append(Transition t);
  void append(std::shared_ptr<const Transition> t);

  // Draws B window starts uniformly from the valid contiguous windows.
  // Throws std::runtime_error when fewer than T transitions are stored.
  SequenceBatch sample(int B, int T, Rng& rng) const;

  ReplayStats stats() const;
  int64_t capacity() const { return capacity_; }

  // Chunked on-disk spill. Reloading reproduces stats() and, given the same
  // rng, sample() results.
  void save(const std::string& dir, int64_t chunk_size = 4096) const;
  static ReplayBuffer load(const std::string& dir);

 private:
  int64_t capacity_;
  mutable std::mutex mu_;
  std::vector<std::shared_ptr<const Transition>> ring_;
  int64_t total_appended_ = 0;
  int64_t episodes_seen_ = 0;
};

}  // namespace dreamer
