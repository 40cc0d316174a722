#include "cli/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "cli/config.hpp"
#include "cli/manifest.hpp"
#include "danet/checkpoint.hpp"
#include "danet/eval.hpp"
#include "danet/gradcheck.hpp"
#include "danet/metrics.hpp"
#include "danet/version.hpp"

namespace danet::cli {

namespace {

namespace fs = std::filesystem;

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setfill('0') << std::setw(16) << v;
  return os.str();
}

struct RunContext {
  RunConfig config;
  bool replaying = false;
  std::uint64_t expected_checksum = 0;
};

RunContext resolve_config(const CommandOptions& opts) {
  RunContext ctx;
  if (!opts.replay_manifest.empty()) {
    const Manifest m = load_manifest(opts.replay_manifest);
    ctx.config = m.config;
    ctx.replaying = true;
    ctx.expected_checksum = m.metrics_checksum;
    return ctx;
  }
  ctx.config = opts.config_path.empty() ? RunConfig{}
                                        : load_config_file(opts.config_path);
  if (opts.seed_override) ctx.config.seed = *opts.seed_override;
  return ctx;
}

fs::path prepare_out_dir(const CommandOptions& opts) {
  fs::path dir(opts.out_dir);
  fs::create_directories(dir);
  return dir;
}

// Exit code 0 on success; replay mismatches are reported as failures.
int finish_run(const RunContext& ctx, Manifest& manifest,
               const MetricsLog& log, const fs::path& dir) {
  manifest.metrics_checksum = log.checksum();
  manifest.finished_at = iso8601_now();
  log.write_jsonl((dir / "metrics.jsonl").string());
  write_manifest(manifest, (dir / "manifest.json").string());
  std::cout << "metrics checksum: " << hex64(manifest.metrics_checksum)
            << "\n";
  if (ctx.replaying) {
    if (manifest.metrics_checksum != ctx.expected_checksum) {
      std::cerr << "replay mismatch: expected "
                << hex64(ctx.expected_checksum) << ", got "
                << hex64(manifest.metrics_checksum) << "\n";
      return 1;
    }
    std::cout << "replay verified: metrics match the manifest\n";
  }
  return 0;
}

void write_csv(const fs::path& path, const std::string& header,
               const std::vector<std::string>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw ArgumentError("cannot open '" + path.string() + "'");
  }
  out << header << "\n";
  for (const std::string& row : rows) out << row << "\n";
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

int cmd_meta_train(const CommandOptions& opts) {
  RunContext ctx = resolve_config(opts);
  const fs::path dir = prepare_out_dir(opts);
  const RunConfig& cfg = ctx.config;
  const std::string run_id = "meta-train-s" + std::to_string(cfg.seed);

  Manifest manifest;
  manifest.command = "meta-train";
  manifest.code_version = kVersion;
  manifest.config = cfg;
  manifest.root_seed = cfg.seed;
  manifest.started_at = iso8601_now();

  MetricsLog log;
  MetaTrainHooks hooks;
  hooks.on_epoch_end = [&](const MetaEpochRecord& rec) {
    MetricRecord m;
    m.run_id = run_id;
    m.epoch = rec.epoch;
    m.memory_loss = rec.memory_loss;
    m.total_loss = rec.total_loss;
    m.wall_ms = rec.wall_ms;
    log.append(m);
    if (rec.epoch % 25 == 0) {
      std::cout << "epoch " << rec.epoch << "  memory_loss "
                << rec.memory_loss << "  total_loss " << rec.total_loss
                << "\n";
    }
  };

  MetaTrainResult result = meta_train(cfg.train_config(), &hooks);
  manifest.functions = result.functions;

  const fs::path ckpt = dir / "checkpoint.bin";
  save_checkpoint(result.state.network(), cfg.seed, ckpt.string());
  manifest.checkpoints.push_back(ckpt.string());
  std::cout << "checkpoint written to " << ckpt.string() << "\n";
  return finish_run(ctx, manifest, log, dir);
}

int cmd_deploy(const CommandOptions& opts) {
  RunContext ctx = resolve_config(opts);
  const fs::path dir = prepare_out_dir(opts);
  const RunConfig& cfg = ctx.config;
  if (opts.checkpoint_path.empty()) {
    throw ConfigError("deploy needs --checkpoint");
  }
  Checkpoint ckpt = load_checkpoint(opts.checkpoint_path);
  const std::string run_id = "deploy-s" + std::to_string(cfg.seed);

  Manifest manifest;
  manifest.command = "deploy";
  manifest.code_version = kVersion;
  manifest.config = cfg;
  manifest.root_seed = cfg.seed;
  manifest.started_at = iso8601_now();
  manifest.checkpoints.push_back(opts.checkpoint_path);

  MetricsLog log;
  std::vector<std::string> prediction_rows;
  const DeployConfig dcfg = cfg.deploy_config();

  for (int trial = 0; trial < cfg.deploy_n_functions; ++trial) {
    RngStream task_rng = make_stream(cfg.seed, "deploy-task",
                                     static_cast<std::uint64_t>(trial));
    const TargetFunction f = sample_target_function(task_rng);
    manifest.functions.push_back(f);

    NetworkOfDANs net(ckpt.network.topology(), ckpt.network.sharing(),
                      ckpt.network.dan_shape());
    net.copy_phi_from(ckpt.network);
    if (cfg.deploy_theta_seed) {
      RngStream theta_rng = make_stream(*cfg.deploy_theta_seed, "theta-init");
      net.init_theta(theta_rng);
    } else {
      net.copy_theta_from(ckpt.network);
    }
    ModelState state(std::move(net));
    const std::uint64_t phi_before = state.phi_checksum();

    DeployHooks hooks;
    hooks.after_stage = [&](int stage, const ModelState& s,
                            const TrajectoryHistory&) {
      for (const PredictionRow& row :
           prediction_snapshot(s, f, cfg.grid_points)) {
        prediction_rows.push_back(std::to_string(trial) + "," +
                                  std::to_string(stage) + "," + fmt(row.x) +
                                  "," + fmt(row.y_true) + "," +
                                  fmt(row.y_pred));
      }
    };

    RngStream data_rng = make_stream(cfg.seed, "deploy-data",
                                     static_cast<std::uint64_t>(trial));
    const std::vector<StageRecord> stages =
        deploy(state, f, dcfg, data_rng, &hooks);

    const std::uint64_t phi_after = state.phi_checksum();
    if (phi_before != phi_after) {
      throw ContractError("deploy mutated the phenotype (checksum " +
                          hex64(phi_before) + " -> " + hex64(phi_after) +
                          ")");
    }
    for (const StageRecord& st : stages) {
      MetricRecord m;
      m.run_id = run_id;
      m.stage = st.stage;
      if (st.stage > 0) m.memory_loss = st.memory_loss;
      m.total_loss = st.total_loss;
      m.wall_ms = st.wall_ms;
      m.tags.emplace_back("trial", std::to_string(trial));
      m.tags.emplace_back("samples",
                          std::to_string(st.stage == 0 ? 0
                                                       : cfg.inner_steps));
      m.tags.emplace_back("phi_checksum",
                          hex64(st.stage == 0 ? phi_before : phi_after));
      log.append(m);
    }
  }

  write_csv(dir / "predictions.csv", "trial,stage,x,y_true,y_pred",
            prediction_rows);
  return finish_run(ctx, manifest, log, dir);
}

int cmd_baselines(const CommandOptions& opts) {
  RunContext ctx = resolve_config(opts);
  const fs::path dir = prepare_out_dir(opts);
  const RunConfig& cfg = ctx.config;
  if (opts.checkpoint_path.empty()) {
    throw ConfigError("baselines needs --checkpoint (meta-learned cells)");
  }
  Checkpoint ckpt = load_checkpoint(opts.checkpoint_path);
  const std::string run_id = "baselines-s" + std::to_string(cfg.seed);

  Manifest manifest;
  manifest.command = "baselines";
  manifest.code_version = kVersion;
  manifest.config = cfg;
  manifest.root_seed = cfg.seed;
  manifest.started_at = iso8601_now();
  manifest.checkpoints.push_back(opts.checkpoint_path);

  BaselineSuiteConfig suite;
  suite.n_functions = cfg.baselines_n_functions;
  suite.seeds = cfg.baselines_seeds;
  suite.deploy = cfg.deploy_config();
  suite.jobs = opts.jobs;
  const BaselineSuiteResult result =
      run_baseline_suite(deployment_baselines(), ckpt.network, suite);

  MetricsLog log;
  for (const BaselineRun& run : result.runs) {
    if (run.baseline == "net0") manifest.functions.push_back(run.function);
    for (const StageRecord& st : run.stages) {
      MetricRecord m;
      m.run_id = run_id;
      m.stage = st.stage;
      if (st.stage > 0) m.memory_loss = st.memory_loss;
      m.total_loss = st.total_loss;
      m.wall_ms = st.wall_ms;
      m.tags.emplace_back("baseline", run.baseline);
      m.tags.emplace_back("seed", std::to_string(run.seed));
      m.tags.emplace_back("trial", std::to_string(run.trial));
      log.append(m);
    }
  }

  std::vector<std::string> rows;
  for (const BaselineTableRow& row : result.table) {
    rows.push_back(row.baseline + "," + std::to_string(row.stage) + "," +
                   fmt(row.mean_total) + "," + fmt(row.sd_total) + "," +
                   fmt(row.mean_memory) + "," + fmt(row.sd_memory) + "," +
                   std::to_string(row.n));
  }
  write_csv(dir / "baselines.csv",
            "baseline,stage,mean_total_loss,sd_total_loss,mean_memory_loss,"
            "sd_memory_loss,n",
            rows);

  std::vector<std::string> winrows;
  for (const auto& [baseline, rate] : result.net0_win_rates) {
    winrows.push_back(baseline + "," + fmt(rate));
    std::cout << "net0 beats " << baseline << " on stage-5 memory loss in "
              << rate * 100.0 << "% of paired trials\n";
  }
  write_csv(dir / "winrates.csv", "baseline,net0_win_rate", winrows);
  return finish_run(ctx, manifest, log, dir);
}

int cmd_ablate_channels(const CommandOptions& opts) {
  RunContext ctx = resolve_config(opts);
  const fs::path dir = prepare_out_dir(opts);
  const RunConfig& cfg = ctx.config;
  const std::string run_id = "ablate-channels-s" + std::to_string(cfg.seed);

  Manifest manifest;
  manifest.command = "ablate-channels";
  manifest.code_version = kVersion;
  manifest.config = cfg;
  manifest.root_seed = cfg.seed;
  manifest.started_at = iso8601_now();

  AblationSpec spec;
  spec.channel_counts = cfg.ablation_channel_counts;
  spec.meta_epochs = cfg.ablation_meta_epochs;
  spec.seeds = cfg.ablation_seeds;
  spec.base = cfg.train_config();
  spec.jobs = opts.jobs;
  const AblationResult result = run_channel_ablation(spec);

  MetricsLog log;
  std::vector<std::string> curve_rows;
  for (const AblationCell& cell : result.cells) {
    for (const MetaEpochRecord& rec : cell.curve) {
      curve_rows.push_back(std::to_string(cell.n_channels) + "," +
                           std::to_string(cell.seed) + "," +
                           std::to_string(rec.epoch) + "," +
                           fmt(rec.memory_loss) + "," + fmt(rec.total_loss));
      MetricRecord m;
      m.run_id = run_id;
      m.epoch = rec.epoch;
      m.memory_loss = rec.memory_loss;
      m.total_loss = rec.total_loss;
      m.wall_ms = rec.wall_ms;
      m.tags.emplace_back("n_channels", std::to_string(cell.n_channels));
      m.tags.emplace_back("seed", std::to_string(cell.seed));
      log.append(m);
    }
    if (cell.diverged) {
      std::cerr << "cell n_channels=" << cell.n_channels
                << " seed=" << cell.seed << " diverged: " << cell.error
                << "\n";
    }
  }
  write_csv(dir / "ablation_curves.csv",
            "n_channels,seed,epoch,memory_loss,total_loss", curve_rows);

  std::vector<std::string> summary_rows;
  for (const auto& [channels, auc] : result.mean_auc) {
    summary_rows.push_back(std::to_string(channels) + "," + fmt(auc));
  }
  write_csv(dir / "ablation_summary.csv", "n_channels,mean_memory_loss_auc",
            summary_rows);

  std::cout << "spearman(n_channels, memory-loss AUC) = "
            << result.spearman_channels_vs_auc << "\n";
  return finish_run(ctx, manifest, log, dir);
}

int cmd_gradcheck(const CommandOptions& opts) {
  RunContext ctx = resolve_config(opts);
  const fs::path dir = prepare_out_dir(opts);
  const RunConfig& cfg = ctx.config;

  GradCheckSettings settings;
  settings.rel_tolerance = cfg.gradcheck_tolerance;
  const GradCheckSuiteReport suite =
      run_gradcheck_suite(cfg.gradcheck_trials, cfg.seed, settings);

  std::ofstream report(dir / "gradcheck_report.txt", std::ios::trunc);
  int trial_idx = 0;
  for (const auto& [trial, rep] : suite.trials) {
    std::ostringstream topo;
    topo << "[";
    for (std::size_t i = 0; i < trial.topology.layer_sizes.size(); ++i) {
      topo << (i ? "," : "") << trial.topology.layer_sizes[i];
    }
    topo << "] c" << trial.topology.n_channels;
    report << "trial " << trial_idx << " " << topo.str() << " "
           << to_string(trial.sharing) << (rep.passed ? " ok" : " FAIL")
           << "\n";
    for (const TensorGradReport& tr : rep.tensors) {
      report << "  " << tr.name << " max_rel_err " << tr.max_rel_err
             << " max_abs_err " << tr.max_abs_err << "\n";
      if (!tr.passed) {
        std::cerr << "gradcheck failure: trial " << trial_idx << " tensor "
                  << tr.name << " rel err " << tr.max_rel_err << " > "
                  << settings.rel_tolerance << "\n";
      }
    }
    ++trial_idx;
  }
  report << "max relative error over " << suite.trials.size() << " trials: "
         << suite.max_rel_err << "\n";
  report << (suite.passed ? "PASS" : "FAIL") << "\n";

  std::cout << "gradcheck: " << suite.trials.size() << " trials, max rel err "
            << suite.max_rel_err << " -> "
            << (suite.passed ? "PASS" : "FAIL") << "\n";
  return suite.passed ? 0 : 1;
}

}  // namespace danet::cli
