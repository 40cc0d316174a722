#include <iostream>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "danet/errors.hpp"
#include "danet/version.hpp"

namespace {

void add_common(CLI::App* cmd, danet::cli::CommandOptions& opts) {
  cmd->add_option("-c,--config", opts.config_path, "JSON config file");
  cmd->add_option("-o,--out", opts.out_dir, "output directory");
  cmd->add_option_function<std::uint64_t>(
      "-s,--seed", [&opts](std::uint64_t s) { opts.seed_override = s; },
      "override the root seed");
  cmd->add_option("-j,--jobs", opts.jobs, "parallel suite cells");
  cmd->add_option("--replay", opts.replay_manifest,
                  "rerun a recorded manifest and verify the metrics match");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Networks of deep artificial neurons: meta-training and "
               "continual-learning experiments"};
  app.set_version_flag("--version", danet::kVersion);
  app.require_subcommand(1);

  danet::cli::CommandOptions opts;

  CLI::App* meta = app.add_subcommand(
      "meta-train", "meta-learn a neuronal phenotype; writes a checkpoint");
  add_common(meta, opts);

  CLI::App* dep = app.add_subcommand(
      "deploy", "sequential sub-task deployment with a fixed phenotype");
  add_common(dep, opts);
  dep->add_option("--checkpoint", opts.checkpoint_path,
                  "phenotype checkpoint")->required();

  CLI::App* base = app.add_subcommand(
      "baselines", "paired net0..net5 deployment comparison");
  add_common(base, opts);
  base->add_option("--checkpoint", opts.checkpoint_path,
                   "phenotype checkpoint")->required();

  CLI::App* abl = app.add_subcommand(
      "ablate-channels", "meta-training efficiency vs channel count");
  add_common(abl, opts);

  CLI::App* grad = app.add_subcommand(
      "gradcheck", "finite-difference validation of the backward pass");
  add_common(grad, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (meta->parsed()) return danet::cli::cmd_meta_train(opts);
    if (dep->parsed()) return danet::cli::cmd_deploy(opts);
    if (base->parsed()) return danet::cli::cmd_baselines(opts);
    if (abl->parsed()) return danet::cli::cmd_ablate_channels(opts);
    if (grad->parsed()) return danet::cli::cmd_gradcheck(opts);
  } catch (const danet::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const danet::CheckpointError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const danet::DivergenceError& e) {
    std::cerr << "run diverged: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
