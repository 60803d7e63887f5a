#include "dreamer/replay/replay_buffer.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dreamer/core/serialize.hpp"

namespace fs = std::filesystem;

namespace dreamer {

ReplayBuffer::ReplayBuffer(int64_t capacity) : capacity_(capacity) {
  if (capacity <= 0) throw std::invalid_argument("replay capacity must be positive");
  ring_.resize(static_cast<size_t>(capacity));
}

void ReplayBuffer::append(Transition t) {
  append(std::make_shared<const Transition>(std::move(t)));
}

void ReplayBuffer::append(std::shared_ptr<const Transition> t) {
  const bool ends_episode = t->is_last;
  std::lock_guard<std::mutex> lock(mu_);
  ring_[static_cast<size_t>(total_appended_ % capacity_)] = std::move(t);
  ++total_appended_;
  if (ends_episode) ++episodes_seen_;
}

SequenceBatch ReplayBuffer::sample(int B, int T, Rng& rng) const {
  SequenceBatch batch;
  batch.B = B;
  batch.T = T;
  batch.seq.resize(static_cast<size_t>(B));
  std::lock_guard<std::mutex> lock(mu_);
  const int64_t length = std::min(total_appended_, capacity_);
  if (length < T)
    throw std::runtime_error("insufficient data: buffer holds " + std::to_string(length) +
                             " transitions, need " + std::to_string(T));
  const int64_t first = total_appended_ - length;  // oldest absolute index
  const int64_t windows = length - T + 1;
  for (int b = 0; b < B; ++b) {
    const int64_t start = first + rng.uniform_int64(windows);
    auto& dst = batch.seq[static_cast<size_t>(b)];
    dst.reserve(static_cast<size_t>(T));
    for (int t = 0; t < T; ++t)
      dst.push_back(ring_[static_cast<size_t>((start + t) % capacity_)]);
  }
  return batch;
}

ReplayStats ReplayBuffer::stats() const {
  std::lock_guard<std::mutex> lock(mu_);
  return {std::min(total_appended_, capacity_), total_appended_, episodes_seen_};
}

void ReplayBuffer::save(const std::string& dir, int64_t chunk_size) const {
  std::vector<std::shared_ptr<const Transition>> snapshot;
  int64_t total = 0, episodes = 0;
  {
    std::lock_guard<std::mutex> lock(mu_);
    const int64_t length = std::min(total_appended_, capacity_);
    snapshot.reserve(static_cast<size_t>(length));
    for (int64_t i = total_appended_ - length; i < total_appended_; ++i)
      snapshot.push_back(ring_[static_cast<size_t>(i % capacity_)]);
    total = total_appended_;
    episodes = episodes_seen_;
  }

  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["format_version"] = 1;
  manifest["capacity"] = capacity_;
  manifest["total_appended"] = total;
  manifest["episodes_seen"] = episodes;
  manifest["chunk_size"] = chunk_size;
  int chunk_count = 0;
  for (int64_t off = 0; off < static_cast<int64_t>(snapshot.size()); off += chunk_size) {
    const std::string name = "chunk_" + std::to_string(chunk_count++) + ".bin";
    std::ofstream os(fs::path(dir) / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write replay chunk " + name);
    const int64_t end = std::min<int64_t>(off + chunk_size, static_cast<int64_t>(snapshot.size()));
    io::write_u64(os, static_cast<uint64_t>(end - off));
    for (int64_t i = off; i < end; ++i) write_transition(os, *snapshot[static_cast<size_t>(i)]);
  }
  manifest["chunks"] = chunk_count;
  manifest["length"] = snapshot.size();
  std::ofstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw std::runtime_error("cannot write replay manifest");
  mf << manifest.dump(2) << "\n";
}

ReplayBuffer ReplayBuffer::load(const std::string& dir) {
  std::ifstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw std::runtime_error("no replay manifest in '" + dir + "'");
  nlohmann::json manifest = nlohmann::json::parse(mf);
  if (manifest.at("format_version").get<int>() != 1)
    throw std::runtime_error("unsupported replay format version");
  ReplayBuffer buffer(manifest.at("capacity").get<int64_t>());
  const int chunks = manifest.at("chunks").get<int>();
  std::vector<std::shared_ptr<const Transition>> items;
  for (int c = 0; c < chunks; ++c) {
    std::ifstream is(fs::path(dir) / ("chunk_" + std::to_string(c) + ".bin"), std::ios::binary);
    if (!is) throw std::runtime_error("missing replay chunk " + std::to_string(c));
    uint64_t n = io::read_u64(is);
    for (uint64_t i = 0; i < n; ++i)
      items.push_back(std::make_shared<const Transition>(read_transition(is)));
  }
  const int64_t total = manifest.at("total_appended").get<int64_t>();
  // Rebuild the ring so absolute indices line up with the original buffer.
  buffer.total_appended_ = total - static_cast<int64_t>(items.size());
  for (auto& item : items) {
    buffer.ring_[static_cast<size_t>(buffer.total_appended_ % buffer.capacity_)] = std::move(item);
    ++buffer.total_appended_;
  }
  buffer.episodes_seen_ = manifest.at("episodes_seen").get<int64_t>();
  return buffer;
}

}  // namespace dreamer
