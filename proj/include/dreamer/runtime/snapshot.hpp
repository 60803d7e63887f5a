#pragma once

#include <memory>
#include <mutex>

#include "dreamer/behavior/behavior.hpp"
#include "dreamer/wm/world_model.hpp"

namespace dreamer::runtime {

// Immutable copy of everything the actor needs to act: encoder + dynamics
// (world model) and the actor head (behavior). Never mutated after
// construction; consumers hold it via shared_ptr.
struct PolicySnapshot {
  int64_t version = 0;
  wm::WorldModel world;
  behavior::Behavior policy;

  PolicySnapshot(int64_t v, wm::WorldModel w, behavior::Behavior p)
      : version(v), world(std::move(w)), policy(std::move(p)) {}
};

// Latest-wins single-slot mailbox between the learner (publisher) and actor
// (consumer). Fetch before the first publish returns the initial snapshot.
class SnapshotSlot {
 public:
  explicit SnapshotSlot(std::shared_ptr<const PolicySnapshot> initial);

  void publish(std::shared_ptr<const PolicySnapshot> snapshot);
  std::shared_ptr<const PolicySnapshot> fetch() const;

  int64_t publish_count() const;

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const PolicySnapshot> latest_;
  int64_t publishes_ = 0;
};

}  // namespace dreamer::runtime
