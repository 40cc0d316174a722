#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "danet/eval.hpp"
#include "danet/training.hpp"

namespace danet::cli {

/// Effective configuration of one CLI run. Defaults reproduce the headline
/// experiment: topology [1,40,40,1], 40 channels, skip connections over
/// both (j, j+2) pairs, alpha 0.001, gamma 0.0001.
struct RunConfig {
  // model
  std::vector<std::size_t> topology = {1, 40, 40, 1};
  std::size_t n_channels = 40;
  std::string sharing = "single";
  std::size_t dan_h1 = 15;
  std::size_t dan_h2 = 8;
  bool skip_connections = true;

  // train
  double alpha = 1e-3;
  double gamma = 1e-4;
  int inner_steps = 100;
  int meta_epochs = 300;
  std::string optimizer = "sgd";
  int grid_points = 500;

  std::uint64_t seed = 1;

  // deploy
  int deploy_n_functions = 20;
  std::optional<std::uint64_t> deploy_theta_seed;  // default: checkpoint init

  // baselines
  int baselines_n_functions = 20;
  std::vector<std::uint64_t> baselines_seeds = {1, 2, 3};

  // ablation
  std::vector<std::size_t> ablation_channel_counts = {1, 5, 10, 20, 40};
  int ablation_meta_epochs = 150;
  std::vector<std::uint64_t> ablation_seeds = {1, 2, 3};

  // gradcheck
  int gradcheck_trials = 50;
  double gradcheck_tolerance = 1e-4;

  danet::TrainConfig train_config() const;
  danet::DeployConfig deploy_config() const;
  danet::Topology make_topology_config() const;
  danet::PhenotypeShape phenotype_shape() const;
  danet::SharingMode sharing_mode() const;

  nlohmann::json to_json() const;
};

/// Parses a config document; every key is checked against the schema and
/// unknown keys are rejected with their full field path.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config_file(const std::string& path);

}  // namespace danet::cli
