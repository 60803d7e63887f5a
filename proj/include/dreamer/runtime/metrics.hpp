#pragma once

#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dreamer::runtime {

// Append-only line-delimited JSON log. One record per call, flushed per line;
// disk faults surface as exceptions.
class MetricsLogger {
 public:
  explicit MetricsLogger(const std::string& path);

  void append(const nlohmann::json& record);
  int64_t records_written() const { return records_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  std::mutex mu_;
  int64_t records_ = 0;
};

std::vector<nlohmann::json> read_jsonl(const std::string& path);

}  // namespace dreamer::runtime
