#include "cli/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include "danet/errors.hpp"

namespace danet::cli {

namespace {

using nlohmann::json;

json function_to_json(const TargetFunction& f) {
  return json{{"a0", f.a0}, {"a1", f.a1}, {"r0", f.r0},
              {"r1", f.r1}, {"o0", f.o0}, {"o1", f.o1}};
}

TargetFunction function_from_json(const json& j) {
  TargetFunction f;
  f.a0 = j.at("a0").get<double>();
  f.a1 = j.at("a1").get<double>();
  f.r0 = j.at("r0").get<double>();
  f.r1 = j.at("r1").get<double>();
  f.o0 = j.at("o0").get<double>();
  f.o1 = j.at("o1").get<double>();
  return f;
}

}  // namespace

std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

json Manifest::to_json() const {
  json j;
  j["command"] = command;
  j["code_version"] = code_version;
  j["config"] = config.to_json();
  j["root_seed"] = root_seed;
  json fns = json::array();
  for (const TargetFunction& f : functions) fns.push_back(function_to_json(f));
  j["target_functions"] = fns;
  j["checkpoints"] = checkpoints;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  j["metrics_checksum"] = metrics_checksum;
  return j;
}

Manifest manifest_from_json(const json& doc) {
  Manifest m;
  m.command = doc.at("command").get<std::string>();
  m.code_version = doc.at("code_version").get<std::string>();
  m.config = parse_config(doc.at("config"));
  m.root_seed = doc.at("root_seed").get<std::uint64_t>();
  for (const json& f : doc.at("target_functions")) {
    m.functions.push_back(function_from_json(f));
  }
  m.checkpoints = doc.at("checkpoints").get<std::vector<std::string>>();
  m.started_at = doc.at("started_at").get<std::string>();
  m.finished_at = doc.at("finished_at").get<std::string>();
  m.metrics_checksum = doc.at("metrics_checksum").get<std::uint64_t>();
  return m;
}

void write_manifest(const Manifest& m, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw ArgumentError("cannot open manifest file '" + path + "'");
  }
  out << m.to_json().dump(2) << "\n";
}

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open manifest '" + path + "'");
  }
  json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("manifest '" + path + "' is not valid JSON: " +
                      e.what());
  }
  try {
    return manifest_from_json(doc);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("manifest '" + path + "' is malformed: " + e.what());
  }
}

}  // namespace danet::cli
