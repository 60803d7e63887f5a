#include "dreamer/runtime/metrics.hpp"

#include <stdexcept>

namespace dreamer::runtime {

MetricsLogger::MetricsLogger(const std::string& path)
    : path_(path), out_(path, std::ios::app) {
  if (!out_) throw std::runtime_error("cannot open metrics log '" + path + "'");
}

void MetricsLogger::append(const nlohmann::json& record) {
  std::lock_guard<std::mutex> lock(mu_);
  out_ << record.dump() << "\n";
  out_.flush();
  if (!out_) throw std::runtime_error("write failure on metrics log '" + path_ + "'");
  ++records_;
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open log '" + path + "'");
  std::vector<nlohmann::json> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(nlohmann::json::parse(line));
  }
  return records;
}

}  // namespace dreamer::runtime
