#include "danet/metrics.hpp"

#include <fstream>

#include <json.hpp>

#include "danet/errors.hpp"
#include "danet/tensor.hpp"

namespace danet {

namespace {

using nlohmann::json;

json to_json(const MetricRecord& rec, bool with_wall) {
  json j;
  j["run_id"] = rec.run_id;
  if (rec.epoch) j["epoch"] = *rec.epoch;
  if (rec.stage) j["stage"] = *rec.stage;
  if (rec.memory_loss) {
    j["memory_loss"] = *rec.memory_loss;
  } else {
    j["memory_loss"] = nullptr;
  }
  j["total_loss"] = rec.total_loss;
  if (with_wall) j["wall_ms"] = rec.wall_ms;
  for (const auto& [k, v] : rec.tags) j[k] = v;
  return j;
}

}  // namespace

std::string to_json_line(const MetricRecord& rec) {
  return to_json(rec, /*with_wall=*/true).dump();
}

std::uint64_t MetricsLog::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const MetricRecord& rec : records_) {
    const std::string line = to_json(rec, /*with_wall=*/false).dump();
    h = fnv1a64(line.data(), line.size(), h);
  }
  return h;
}

void MetricsLog::write_jsonl(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw ArgumentError("cannot open metrics file '" + path + "'");
  }
  for (const MetricRecord& rec : records_) {
    out << to_json_line(rec) << "\n";
  }
}

}  // namespace danet
