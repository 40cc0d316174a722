#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli/config.hpp"
#include "danet/tasks.hpp"

namespace danet::cli {

/// Replay record for one CLI run: the effective config, seed, every
/// sampled target function, output references, and the checksum of the
/// deterministic metric fields. Wall-clock times are informational and not
/// part of replay identity.
struct Manifest {
  std::string command;
  std::string code_version;
  RunConfig config;
  std::uint64_t root_seed = 0;
  std::vector<TargetFunction> functions;
  std::vector<std::string> checkpoints;
  std::string started_at;
  std::string finished_at;
  std::uint64_t metrics_checksum = 0;

  nlohmann::json to_json() const;
};

Manifest manifest_from_json(const nlohmann::json& doc);
void write_manifest(const Manifest& m, const std::string& path);
Manifest load_manifest(const std::string& path);

std::string iso8601_now();

}  // namespace danet::cli
