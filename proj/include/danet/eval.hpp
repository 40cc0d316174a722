#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "danet/training.hpp"

namespace danet {

// ---- small statistics helpers -------------------------------------------

double mean(std::span<const double> xs);
double sample_sd(std::span<const double> xs);
double median(std::vector<double> xs);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> xs, std::span<const double> ys);

/// Normalized area under a per-epoch loss curve (mean of the values);
/// rank-equivalent to the trapezoid integral for equal-length curves.
double loss_auc(std::span<const double> losses);

// ---- deployment baseline suite ------------------------------------------

enum class PhenotypeSource { kMetaLearned, kRandom };

/// One deployment variant: where the phenotype comes from, how it is
/// shared, and whether it stays plastic during deployment.
struct BaselineSpec {
  std::string id;
  PhenotypeSource source = PhenotypeSource::kRandom;
  SharingMode sharing = SharingMode::kSingle;
  bool plastic_phi = false;
};

/// net0..net5: meta-learned fixed / meta-learned plastic / random fixed /
/// random plastic / random per-node fixed / random per-node plastic.
std::vector<BaselineSpec> deployment_baselines();

struct BaselineRun {
  std::string baseline;
  std::uint64_t seed = 0;
  int trial = 0;  // target-function index within the seed
  TargetFunction function;
  std::vector<StageRecord> stages;  // 6 records, stage 0..5
};

struct BaselineTableRow {
  std::string baseline;
  int stage = 0;
  double mean_total = 0, sd_total = 0;
  double mean_memory = 0, sd_memory = 0;  // NaN at stage 0
  int n = 0;
};

struct BaselineSuiteResult {
  std::vector<BaselineRun> runs;
  std::vector<BaselineTableRow> table;
  /// Fraction of trials where net0's stage-5 memory loss beats the other
  /// baseline's, paired over identical functions and data streams.
  std::vector<std::pair<std::string, double>> net0_win_rates;
};

struct BaselineSuiteConfig {
  int n_functions = 20;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  DeployConfig deploy;
  int jobs = 1;
};

/// Runs every baseline over shared target functions and data streams.
/// Within one (seed, trial) cell all baselines consume identical samples
/// and start from the checkpoint's VEC initialization; only the phenotype
/// differs where the spec differs.
BaselineSuiteResult run_baseline_suite(const std::vector<BaselineSpec>& specs,
                                       const NetworkOfDANs& checkpoint_net,
                                       const BaselineSuiteConfig& cfg);

// ---- channel-count ablation ----------------------------------------------

struct AblationSpec {
  std::vector<std::size_t> channel_counts = {1, 5, 10, 20, 40};
  int meta_epochs = 150;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  TrainConfig base;  // topology/n_channels/dan_shape.in overridden per cell
  int jobs = 1;
};

struct AblationCell {
  std::size_t n_channels = 0;
  std::uint64_t seed = 0;
  std::vector<MetaEpochRecord> curve;
  double auc = 0;
  bool diverged = false;
  std::string error;
};

struct AblationResult {
  std::vector<AblationCell> cells;
  std::vector<std::pair<std::size_t, double>> mean_auc;  // per channel count
  double spearman_channels_vs_auc = 0;
};

/// Meta-trains once per (channel count, seed) with equal epoch budgets and
/// summarizes memory-loss efficiency per channel count. A diverged cell is
/// recorded and the suite continues.
AblationResult run_channel_ablation(const AblationSpec& spec);

// ---- prediction snapshots -------------------------------------------------

struct PredictionRow {
  double x = 0, y_true = 0, y_pred = 0;
};

/// Full-grid model predictions against the target, for plot emission.
std::vector<PredictionRow> prediction_snapshot(const ModelState& state,
                                               const TargetFunction& f,
                                               int grid_n);

}  // namespace danet
