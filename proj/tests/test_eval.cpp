#include <cmath>

#include <doctest.h>

#include "danet/eval.hpp"

using namespace danet;

namespace {

NetworkOfDANs tiny_checkpoint(std::uint64_t seed = 1) {
  return NetworkOfDANs::init(make_topology({1, 3, 2, 1}, 2),
                             SharingMode::kSingle, PhenotypeShape{2, 4, 3},
                             seed);
}

BaselineSuiteConfig tiny_suite_config() {
  BaselineSuiteConfig cfg;
  cfg.n_functions = 2;
  cfg.seeds = {1};
  cfg.deploy.inner_steps = 5;
  cfg.deploy.grid_points = 40;
  return cfg;
}

}  // namespace

TEST_CASE("statistics helpers") {
  const double xs[] = {1.0, 2.0, 3.0, 4.0};
  CHECK(mean(xs) == 2.5);
  CHECK(sample_sd(xs) == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);

  const double up[] = {1, 2, 3, 4, 5};
  const double down[] = {10, 8, 6, 4, 2};
  CHECK(spearman(up, down) == doctest::Approx(-1.0));
  CHECK(spearman(up, up) == doctest::Approx(1.0));

  // One adjacent swap in five ranks costs 0.1.
  const double swapped[] = {10, 8, 6, 2, 4};
  CHECK(spearman(up, swapped) == doctest::Approx(-0.9));

  // Ties get average ranks.
  const double tied[] = {1, 1, 2, 3, 4};
  CHECK(spearman(tied, tied) == doctest::Approx(1.0));

  const double curve[] = {0.5, 0.3, 0.1};
  CHECK(loss_auc(curve) == doctest::Approx(0.3));
}

TEST_CASE("deployment baseline table matches the published variants") {
  const auto specs = deployment_baselines();
  REQUIRE(specs.size() == 6);
  CHECK(specs[0].id == "net0");
  CHECK(specs[0].source == PhenotypeSource::kMetaLearned);
  CHECK(specs[0].sharing == SharingMode::kSingle);
  CHECK_FALSE(specs[0].plastic_phi);
  CHECK(specs[1].source == PhenotypeSource::kMetaLearned);
  CHECK(specs[1].plastic_phi);
  CHECK(specs[2].source == PhenotypeSource::kRandom);
  CHECK_FALSE(specs[2].plastic_phi);
  CHECK(specs[3].plastic_phi);
  CHECK(specs[4].sharing == SharingMode::kPerNode);
  CHECK_FALSE(specs[4].plastic_phi);
  CHECK(specs[5].sharing == SharingMode::kPerNode);
  CHECK(specs[5].plastic_phi);
}

TEST_CASE("baseline suite pairs functions and data across baselines") {
  NetworkOfDANs ckpt = tiny_checkpoint();
  const BaselineSuiteResult result = run_baseline_suite(
      deployment_baselines(), ckpt, tiny_suite_config());

  // 6 baselines × 1 seed × 2 trials.
  CHECK(result.runs.size() == 12);
  for (const BaselineRun& run : result.runs) {
    CHECK(run.stages.size() == 6);
  }

  // Every baseline sees the identical target function per trial.
  for (int trial = 0; trial < 2; ++trial) {
    const BaselineRun* net0 = nullptr;
    for (const BaselineRun& run : result.runs) {
      if (run.baseline == "net0" && run.trial == trial) net0 = &run;
    }
    REQUIRE(net0 != nullptr);
    for (const BaselineRun& run : result.runs) {
      if (run.trial != trial) continue;
      CHECK(run.function.a0 == net0->function.a0);
      CHECK(run.function.o1 == net0->function.o1);
    }
  }

  // Stage-0 total loss is evaluated before any update, so the fixed and
  // plastic variants of the same phenotype source coincide there.
  const auto stage0 = [&](const std::string& id, int trial) {
    for (const BaselineRun& run : result.runs) {
      if (run.baseline == id && run.trial == trial) {
        return run.stages[0].total_loss;
      }
    }
    FAIL("missing run");
    return 0.0;
  };
  CHECK(stage0("net0", 0) == stage0("net1", 0));
  CHECK(stage0("net2", 0) == stage0("net3", 0));
  CHECK(stage0("net4", 0) == stage0("net5", 0));

  // Aggregation: table means recompute from the raw runs.
  for (const BaselineTableRow& row : result.table) {
    std::vector<double> totals;
    for (const BaselineRun& run : result.runs) {
      if (run.baseline == row.baseline) {
        totals.push_back(
            run.stages[static_cast<std::size_t>(row.stage)].total_loss);
      }
    }
    CHECK(row.n == 2);
    CHECK(row.mean_total == doctest::Approx(mean(totals)).epsilon(1e-12));
  }
  CHECK(result.table.size() == 6 * 6);
  CHECK(result.net0_win_rates.size() == 5);
}

TEST_CASE("baseline suite results are identical under parallel execution") {
  NetworkOfDANs ckpt = tiny_checkpoint(5);
  BaselineSuiteConfig cfg = tiny_suite_config();
  cfg.jobs = 1;
  const BaselineSuiteResult serial =
      run_baseline_suite(deployment_baselines(), ckpt, cfg);
  cfg.jobs = 4;
  const BaselineSuiteResult parallel =
      run_baseline_suite(deployment_baselines(), ckpt, cfg);
  REQUIRE(serial.runs.size() == parallel.runs.size());
  for (std::size_t i = 0; i < serial.runs.size(); ++i) {
    CHECK(serial.runs[i].baseline == parallel.runs[i].baseline);
    for (std::size_t s = 0; s < 6; ++s) {
      CHECK(serial.runs[i].stages[s].total_loss ==
            parallel.runs[i].stages[s].total_loss);
      if (s > 0) {
        CHECK(serial.runs[i].stages[s].memory_loss ==
              parallel.runs[i].stages[s].memory_loss);
      }
    }
  }
}

TEST_CASE("meta-learned baselines require a compatible checkpoint") {
  NetworkOfDANs per_layer = NetworkOfDANs::init(
      make_topology({1, 3, 2, 1}, 2), SharingMode::kPerLayer,
      PhenotypeShape{2, 4, 3}, 1);
  CHECK_THROWS_AS(run_baseline_suite(deployment_baselines(), per_layer,
                                     tiny_suite_config()),
                  ConfigError);
}

TEST_CASE("channel ablation runs per-cell and summarizes AUC") {
  AblationSpec spec;
  spec.channel_counts = {1, 2};
  spec.meta_epochs = 2;
  spec.seeds = {1, 2};
  spec.base.topology = make_topology({1, 3, 2, 1}, 2);
  spec.base.dan_shape = PhenotypeShape{2, 4, 3};
  spec.base.inner_steps = 5;
  spec.base.grid_points = 40;

  const AblationResult a = run_channel_ablation(spec);
  CHECK(a.cells.size() == 4);
  for (const AblationCell& cell : a.cells) {
    CHECK_FALSE(cell.diverged);
    CHECK(cell.curve.size() == 2);
    CHECK(std::isfinite(cell.auc));
  }
  CHECK(a.mean_auc.size() == 2);
  CHECK(std::fabs(a.spearman_channels_vs_auc) <= 1.0);

  // Identical spec, identical curves.
  const AblationResult b = run_channel_ablation(spec);
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].auc == b.cells[i].auc);
  }

  spec.channel_counts = {2, 1};
  CHECK_THROWS_AS(run_channel_ablation(spec), ArgumentError);
}

TEST_CASE("prediction snapshots cover the grid with exact targets") {
  ModelState state(tiny_checkpoint(9));
  RngStream rng(9);
  const TargetFunction f = sample_target_function(rng);
  const auto rows = prediction_snapshot(state, f, 500);
  REQUIRE(rows.size() == 500);
  CHECK(rows.front().x == -5.0);
  CHECK(rows.back().x == 5.0);
  const double spacing = rows[1].x - rows[0].x;
  CHECK(spacing == doctest::Approx(10.0 / 499.0).epsilon(1e-12));
  for (const PredictionRow& row : rows) {
    CHECK(row.y_pred > -1.0);
    CHECK(row.y_pred < 1.0);
    CHECK(row.y_true == f.evaluate(row.x));
  }
}
