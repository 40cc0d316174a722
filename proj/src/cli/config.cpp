#include "cli/config.hpp"

#include <fstream>
#include <set>

namespace danet::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config error at " + path + ": " + what);
}

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& known) {
  for (const auto& [key, _] : obj.items()) {
    if (!known.count(key)) {
      fail(path + "." + key, "unknown key");
    }
  }
}

double get_number(const json& obj, const std::string& path,
                  const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) fail(path + "." + key, "expected a number");
  return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& path, const std::string& key,
            int fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) fail(path + "." + key,
                                          "expected an integer");
  return obj[key].get<int>();
}

std::uint64_t get_u64(const json& obj, const std::string& path,
                      const std::string& key, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_unsigned() && !obj[key].is_number_integer()) {
    fail(path + "." + key, "expected a non-negative integer");
  }
  return obj[key].get<std::uint64_t>();
}

std::string get_string(const json& obj, const std::string& path,
                       const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) fail(path + "." + key, "expected a string");
  return obj[key].get<std::string>();
}

bool get_bool(const json& obj, const std::string& path, const std::string& key,
              bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) fail(path + "." + key, "expected a boolean");
  return obj[key].get<bool>();
}

template <typename T>
std::vector<T> get_array(const json& obj, const std::string& path,
                         const std::string& key, std::vector<T> fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_array()) fail(path + "." + key, "expected an array");
  std::vector<T> out;
  for (const auto& v : obj[key]) {
    if (!v.is_number_integer() && !v.is_number_unsigned()) {
      fail(path + "." + key, "expected integer entries");
    }
    out.push_back(v.get<T>());
  }
  return out;
}

}  // namespace

danet::Topology RunConfig::make_topology_config() const {
  return danet::make_topology(topology, n_channels, skip_connections);
}

danet::PhenotypeShape RunConfig::phenotype_shape() const {
  return {n_channels, dan_h1, dan_h2};
}

danet::SharingMode RunConfig::sharing_mode() const {
  return sharing_mode_from_string(sharing);
}

danet::TrainConfig RunConfig::train_config() const {
  danet::TrainConfig cfg;
  cfg.topology = make_topology_config();
  cfg.dan_shape = phenotype_shape();
  cfg.sharing = sharing_mode();
  cfg.seed = seed;
  cfg.alpha = alpha;
  cfg.gamma = gamma;
  cfg.inner_steps = inner_steps;
  cfg.meta_epochs = meta_epochs;
  cfg.optimizer = optimizer_kind_from_string(optimizer);
  cfg.grid_points = grid_points;
  cfg.validate();
  return cfg;
}

danet::DeployConfig RunConfig::deploy_config() const {
  danet::DeployConfig cfg;
  cfg.alpha = alpha;
  cfg.gamma = gamma;
  cfg.inner_steps = inner_steps;
  cfg.grid_points = grid_points;
  cfg.optimizer = optimizer_kind_from_string(optimizer);
  return cfg;
}

nlohmann::json RunConfig::to_json() const {
  json model = {{"topology", topology},
                {"n_channels", n_channels},
                {"sharing", sharing},
                {"dan_h1", dan_h1},
                {"dan_h2", dan_h2},
                {"skip_connections", skip_connections}};
  json train = {{"alpha", alpha},
                {"gamma", gamma},
                {"inner_steps", inner_steps},
                {"meta_epochs", meta_epochs},
                {"optimizer", optimizer},
                {"grid_points", grid_points}};
  json deploy = {{"n_functions", deploy_n_functions}};
  if (deploy_theta_seed) deploy["theta_seed"] = *deploy_theta_seed;
  json baselines = {{"n_functions", baselines_n_functions},
                    {"seeds", baselines_seeds}};
  json ablation = {{"channel_counts", ablation_channel_counts},
                   {"meta_epochs", ablation_meta_epochs},
                   {"seeds", ablation_seeds}};
  json gradcheck = {{"trials", gradcheck_trials},
                    {"tolerance", gradcheck_tolerance}};
  return json{{"model", model},         {"train", train},
              {"seed", seed},           {"deploy", deploy},
              {"baselines", baselines}, {"ablation", ablation},
              {"gradcheck", gradcheck}};
}

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) {
    throw ConfigError("config error at $: expected an object");
  }
  check_keys(doc, "$",
             {"model", "train", "seed", "deploy", "baselines", "ablation",
              "gradcheck"});
  RunConfig cfg;
  cfg.seed = get_u64(doc, "$", "seed", cfg.seed);

  if (doc.contains("model")) {
    const json& m = doc["model"];
    if (!m.is_object()) fail("$.model", "expected an object");
    check_keys(m, "$.model",
               {"topology", "n_channels", "sharing", "dan_h1", "dan_h2",
                "skip_connections"});
    cfg.topology = get_array<std::size_t>(m, "$.model", "topology",
                                          cfg.topology);
    cfg.n_channels = get_u64(m, "$.model", "n_channels", cfg.n_channels);
    cfg.sharing = get_string(m, "$.model", "sharing", cfg.sharing);
    cfg.dan_h1 = get_u64(m, "$.model", "dan_h1", cfg.dan_h1);
    cfg.dan_h2 = get_u64(m, "$.model", "dan_h2", cfg.dan_h2);
    cfg.skip_connections =
        get_bool(m, "$.model", "skip_connections", cfg.skip_connections);
  }
  if (doc.contains("train")) {
    const json& t = doc["train"];
    if (!t.is_object()) fail("$.train", "expected an object");
    check_keys(t, "$.train",
               {"alpha", "gamma", "inner_steps", "meta_epochs", "optimizer",
                "grid_points"});
    cfg.alpha = get_number(t, "$.train", "alpha", cfg.alpha);
    cfg.gamma = get_number(t, "$.train", "gamma", cfg.gamma);
    cfg.inner_steps = get_int(t, "$.train", "inner_steps", cfg.inner_steps);
    cfg.meta_epochs = get_int(t, "$.train", "meta_epochs", cfg.meta_epochs);
    cfg.optimizer = get_string(t, "$.train", "optimizer", cfg.optimizer);
    cfg.grid_points = get_int(t, "$.train", "grid_points", cfg.grid_points);
  }
  if (doc.contains("deploy")) {
    const json& d = doc["deploy"];
    if (!d.is_object()) fail("$.deploy", "expected an object");
    check_keys(d, "$.deploy", {"n_functions", "theta_seed"});
    cfg.deploy_n_functions =
        get_int(d, "$.deploy", "n_functions", cfg.deploy_n_functions);
    if (d.contains("theta_seed")) {
      cfg.deploy_theta_seed = get_u64(d, "$.deploy", "theta_seed", 0);
    }
  }
  if (doc.contains("baselines")) {
    const json& b = doc["baselines"];
    if (!b.is_object()) fail("$.baselines", "expected an object");
    check_keys(b, "$.baselines", {"n_functions", "seeds"});
    cfg.baselines_n_functions =
        get_int(b, "$.baselines", "n_functions", cfg.baselines_n_functions);
    cfg.baselines_seeds = get_array<std::uint64_t>(b, "$.baselines", "seeds",
                                                   cfg.baselines_seeds);
  }
  if (doc.contains("ablation")) {
    const json& a = doc["ablation"];
    if (!a.is_object()) fail("$.ablation", "expected an object");
    check_keys(a, "$.ablation", {"channel_counts", "meta_epochs", "seeds"});
    cfg.ablation_channel_counts = get_array<std::size_t>(
        a, "$.ablation", "channel_counts", cfg.ablation_channel_counts);
    cfg.ablation_meta_epochs =
        get_int(a, "$.ablation", "meta_epochs", cfg.ablation_meta_epochs);
    cfg.ablation_seeds = get_array<std::uint64_t>(a, "$.ablation", "seeds",
                                                  cfg.ablation_seeds);
  }
  if (doc.contains("gradcheck")) {
    const json& g = doc["gradcheck"];
    if (!g.is_object()) fail("$.gradcheck", "expected an object");
    check_keys(g, "$.gradcheck", {"trials", "tolerance"});
    cfg.gradcheck_trials =
        get_int(g, "$.gradcheck", "trials", cfg.gradcheck_trials);
    cfg.gradcheck_tolerance =
        get_number(g, "$.gradcheck", "tolerance", cfg.gradcheck_tolerance);
  }
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " +
                      e.what());
  }
  return parse_config(doc);
}

}  // namespace danet::cli
