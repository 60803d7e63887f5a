#include "dreamer/runtime/snapshot.hpp"

#include <stdexcept>

namespace dreamer::runtime {

SnapshotSlot::SnapshotSlot(std::shared_ptr<const PolicySnapshot> initial)
    : latest_(std::move(initial)) {
  if (!latest_) throw std::invalid_argument("initial snapshot must not be null");
}

void SnapshotSlot::publish(std::shared_ptr<const PolicySnapshot> snapshot) {
  if (!snapshot) throw std::invalid_argument("cannot publish a null snapshot");
  std::lock_guard<std::mutex> lock(mu_);
  latest_ = std::move(snapshot);
  ++publishes_;
}

std::shared_ptr<const PolicySnapshot> SnapshotSlot::fetch() const {
  std::lock_guard<std::mutex> lock(mu_);
  return latest_;
}

int64_t SnapshotSlot::publish_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return publishes_;
}

}  // namespace dreamer::runtime
