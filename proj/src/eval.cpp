#include "danet/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

namespace danet {

double mean(std::span<const double> xs) {
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

double median(std::vector<double> xs) {
  if (xs.empty()) {
    throw ArgumentError("median of empty sample");
  }
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

namespace {

// Average ranks, ties share the mean of their positions.
std::vector<double> ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> r(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  const double mx = mean(xs), my = mean(ys);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// Simple work queue: cells run on up to `jobs` threads with fully isolated
// state; results land in pre-sized slots so the merge order is fixed.
void run_cells(std::size_t n_cells, int jobs,
               const std::function<void(std::size_t)>& run_one) {
  const int workers =
      std::max(1, std::min<int>(jobs, static_cast<int>(n_cells)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n_cells; ++i) run_one(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (std::size_t i = next.fetch_add(1); i < n_cells;
           i = next.fetch_add(1)) {
        run_one(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw ArgumentError("spearman: need two equal-length samples of size >= 2");
  }
  const std::vector<double> rx = ranks(xs);
  const std::vector<double> ry = ranks(ys);
  return pearson(rx, ry);
}

double loss_auc(std::span<const double> losses) {
  if (losses.empty()) {
    throw ArgumentError("loss_auc of empty curve");
  }
  return mean(losses);
}

std::vector<BaselineSpec> deployment_baselines() {
  return {
      {"net0", PhenotypeSource::kMetaLearned, SharingMode::kSingle, false},
      {"net1", PhenotypeSource::kMetaLearned, SharingMode::kSingle, true},
      {"net2", PhenotypeSource::kRandom, SharingMode::kSingle, false},
      {"net3", PhenotypeSource::kRandom, SharingMode::kSingle, true},
      {"net4", PhenotypeSource::kRandom, SharingMode::kPerNode, false},
      {"net5", PhenotypeSource::kRandom, SharingMode::kPerNode, true},
  };
}

BaselineSuiteResult run_baseline_suite(const std::vector<BaselineSpec>& specs,
                                       const NetworkOfDANs& checkpoint_net,
                                       const BaselineSuiteConfig& cfg) {
  for (const BaselineSpec& spec : specs) {
    if (spec.source == PhenotypeSource::kMetaLearned &&
        spec.sharing != checkpoint_net.sharing()) {
      throw ConfigError("baseline '" + spec.id +
                        "' needs a checkpoint with sharing mode '" +
                        to_string(spec.sharing) + "'");
    }
  }

  struct Cell {
    std::size_t spec_idx;
    std::uint64_t seed;
    int trial;
  };
  std::vector<Cell> cells;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    for (std::uint64_t seed : cfg.seeds) {
      for (int trial = 0; trial < cfg.n_functions; ++trial) {
        cells.push_back({s, seed, trial});
      }
    }
  }

  const Topology& topo = checkpoint_net.topology();
  const PhenotypeShape shape = checkpoint_net.dan_shape();

  BaselineSuiteResult result;
  result.runs.resize(cells.size());
  run_cells(cells.size(), cfg.jobs, [&](std::size_t idx) {
    const Cell& cell = cells[idx];
    const BaselineSpec& spec = specs[cell.spec_idx];

    // Shared per-(seed, trial) streams: every baseline sees the same
    // target function and the same sample sequence.
    RngStream task_rng = make_stream(cell.seed, "deploy-task",
                                     static_cast<std::uint64_t>(cell.trial));
    const TargetFunction f = sample_target_function(task_rng);
    RngStream data_rng = make_stream(cell.seed, "deploy-data",
                                     static_cast<std::uint64_t>(cell.trial));

    NetworkOfDANs net(topo, spec.sharing, shape);
    net.copy_theta_from(checkpoint_net);
    if (spec.source == PhenotypeSource::kMetaLearned) {
      net.copy_phi_from(checkpoint_net);
    } else {
      // net2/net3 share one random draw, net4/net5 another, so each
      // fixed/plastic pair is exactly comparable.
      const char* stream = spec.sharing == SharingMode::kPerNode
                               ? "deploy-phi-per-node"
                               : "deploy-phi-shared";
      RngStream phi_rng = make_stream(
          cell.seed, stream, static_cast<std::uint64_t>(cell.trial));
      net.init_phi(phi_rng);
    }

    ModelState state(std::move(net));
    DeployConfig dcfg = cfg.deploy;
    dcfg.plastic_phi = spec.plastic_phi;
    BaselineRun run;
    run.baseline = spec.id;
    run.seed = cell.seed;
    run.trial = cell.trial;
    run.function = f;
    run.stages = deploy(state, f, dcfg, data_rng);
    result.runs[idx] = std::move(run);
  });

  // Aggregate per (baseline, stage).
  for (const BaselineSpec& spec : specs) {
    for (int stage = 0; stage <= kNumSubTasks; ++stage) {
      std::vector<double> totals, memories;
      for (const BaselineRun& run : result.runs) {
        if (run.baseline != spec.id) continue;
        totals.push_back(run.stages[static_cast<std::size_t>(stage)]
                             .total_loss);
        if (stage > 0) {
          memories.push_back(run.stages[static_cast<std::size_t>(stage)]
                                 .memory_loss);
        }
      }
      BaselineTableRow row;
      row.baseline = spec.id;
      row.stage = stage;
      row.n = static_cast<int>(totals.size());
      row.mean_total = mean(totals);
      row.sd_total = sample_sd(totals);
      if (stage > 0) {
        row.mean_memory = mean(memories);
        row.sd_memory = sample_sd(memories);
      } else {
        row.mean_memory = std::numeric_limits<double>::quiet_NaN();
        row.sd_memory = std::numeric_limits<double>::quiet_NaN();
      }
      result.table.push_back(row);
    }
  }

  // Paired stage-5 win rates of net0 against every other baseline.
  std::map<std::pair<std::uint64_t, int>, double> net0_final;
  for (const BaselineRun& run : result.runs) {
    if (run.baseline == "net0") {
      net0_final[{run.seed, run.trial}] =
          run.stages.back().memory_loss;
    }
  }
  if (!net0_final.empty()) {
    for (const BaselineSpec& spec : specs) {
      if (spec.id == "net0") continue;
      int wins = 0, total = 0;
      for (const BaselineRun& run : result.runs) {
        if (run.baseline != spec.id) continue;
        const auto it = net0_final.find({run.seed, run.trial});
        if (it == net0_final.end()) continue;
        ++total;
        if (it->second < run.stages.back().memory_loss) ++wins;
      }
      if (total > 0) {
        result.net0_win_rates.emplace_back(
            spec.id, static_cast<double>(wins) / static_cast<double>(total));
      }
    }
  }
  return result;
}

AblationResult run_channel_ablation(const AblationSpec& spec) {
  if (spec.channel_counts.empty()) {
    throw ArgumentError("ablation needs at least one channel count");
  }
  for (std::size_t i = 1; i < spec.channel_counts.size(); ++i) {
    if (spec.channel_counts[i] <= spec.channel_counts[i - 1]) {
      throw ArgumentError("ablation channel counts must be strictly "
                          "increasing");
    }
  }

  struct Cell {
    std::size_t n_channels;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (std::size_t c : spec.channel_counts) {
    for (std::uint64_t seed : spec.seeds) cells.push_back({c, seed});
  }

  AblationResult result;
  result.cells.resize(cells.size());
  run_cells(cells.size(), spec.jobs, [&](std::size_t idx) {
    const Cell& cell = cells[idx];
    AblationCell out;
    out.n_channels = cell.n_channels;
    out.seed = cell.seed;

    TrainConfig cfg = spec.base;
    cfg.topology.n_channels = cell.n_channels;
    cfg.dan_shape.in = cell.n_channels;
    cfg.meta_epochs = spec.meta_epochs;
    cfg.seed = cell.seed;
    try {
      MetaTrainResult trained = meta_train(cfg);
      out.curve = std::move(trained.records);
      std::vector<double> losses;
      losses.reserve(out.curve.size());
      for (const MetaEpochRecord& r : out.curve) {
        losses.push_back(r.memory_loss);
      }
      out.auc = loss_auc(losses);
    } catch (const DivergenceError& e) {
      out.diverged = true;
      out.error = e.what();
      out.auc = std::numeric_limits<double>::quiet_NaN();
    }
    result.cells[idx] = std::move(out);
  });

  std::vector<double> channels, aucs;
  for (std::size_t c : spec.channel_counts) {
    std::vector<double> per_seed;
    for (const AblationCell& cell : result.cells) {
      if (cell.n_channels == c && !cell.diverged) {
        per_seed.push_back(cell.auc);
      }
    }
    if (!per_seed.empty()) {
      const double m = mean(per_seed);
      result.mean_auc.emplace_back(c, m);
      channels.push_back(static_cast<double>(c));
      aucs.push_back(m);
    }
  }
  result.spearman_channels_vs_auc =
      channels.size() >= 2 ? spearman(channels, aucs)
                           : std::numeric_limits<double>::quiet_NaN();
  return result;
}

std::vector<PredictionRow> prediction_snapshot(const ModelState& state,
                                               const TargetFunction& f,
                                               int grid_n) {
  const std::vector<Sample> grid = full_function_grid(f, grid_n);
  std::vector<double> xs;
  xs.reserve(grid.size());
  for (const Sample& s : grid) xs.push_back(s.x);
  const std::vector<double> preds = state.network().predict_batch(xs);
  std::vector<PredictionRow> rows;
  rows.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rows.push_back({grid[i].x, grid[i].y, preds[i]});
  }
  return rows;
}

}  // namespace danet
