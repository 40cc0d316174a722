#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace danet {

/// One line of the line-delimited metrics stream. Meta-training emits one
/// record per epoch; deployment one per stage. Extra key/value pairs tag
/// suite dimensions (baseline id, trial, n_channels, ...).
struct MetricRecord {
  std::string run_id;
  std::optional<int> epoch;
  std::optional<int> stage;
  std::optional<double> memory_loss;  // absent at deploy stage 0
  double total_loss = 0;
  double wall_ms = 0;
  std::vector<std::pair<std::string, std::string>> tags;
};

std::string to_json_line(const MetricRecord& rec);

/// Collects records, writes them as JSONL, and maintains a checksum over
/// the deterministic fields (everything except wall_ms, which is
/// wall-clock and excluded from replay identity).
class MetricsLog {
 public:
  void append(const MetricRecord& rec) { records_.push_back(rec); }
  const std::vector<MetricRecord>& records() const { return records_; }

  std::uint64_t checksum() const;
  void write_jsonl(const std::string& path) const;

 private:
  std::vector<MetricRecord> records_;
};

}  // namespace danet
