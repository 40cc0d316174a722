#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace danet::cli {

struct CommandOptions {
  std::string config_path;       // empty: built-in defaults
  std::string out_dir = "runs";
  std::optional<std::uint64_t> seed_override;
  int jobs = 1;
  std::string replay_manifest;   // rerun a recorded run and compare
  std::string checkpoint_path;   // deploy / baselines input
};

int cmd_meta_train(const CommandOptions& opts);
int cmd_deploy(const CommandOptions& opts);
int cmd_baselines(const CommandOptions& opts);
int cmd_ablate_channels(const CommandOptions& opts);
int cmd_gradcheck(const CommandOptions& opts);

}  // namespace danet::cli
