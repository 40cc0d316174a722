#include <cmath>
#include <limits>

#include <doctest.h>

#include "danet/training.hpp"
#include "oracle.hpp"

using namespace danet;

namespace {

TrainConfig tiny_config(std::uint64_t seed = 1) {
  TrainConfig cfg;
  cfg.topology = make_topology({1, 3, 2, 1}, 2);
  cfg.dan_shape = PhenotypeShape{2, 4, 3};
  cfg.sharing = SharingMode::kSingle;
  cfg.seed = seed;
  cfg.inner_steps = 5;
  cfg.meta_epochs = 2;
  cfg.grid_points = 50;
  return cfg;
}

ModelState tiny_state(std::uint64_t seed = 1) {
  const TrainConfig cfg = tiny_config(seed);
  return ModelState(NetworkOfDANs::init(cfg.topology, cfg.sharing,
                                        cfg.dan_shape, seed));
}

}  // namespace

TEST_CASE("zero learning rates leave all parameters untouched") {
  ModelState state = tiny_state();
  const std::uint64_t before = state.network().checksum(ParamSubset::kBoth);
  const double loss = inner_update(state, {0.5, 0.2}, 0.0, 0.0,
                                   UpdatePhase::kMetaTrain);
  CHECK(state.network().checksum(ParamSubset::kBoth) == before);
  const double pred = state.network().predict(0.5);
  CHECK(loss == doctest::Approx((pred - 0.2) * (pred - 0.2)).epsilon(1e-12));
}

TEST_CASE("deploy-phase updates keep phi bit-identical") {
  ModelState state = tiny_state(2);
  const std::uint64_t phi_before = state.phi_checksum();
  const std::uint64_t theta_before = state.theta_checksum();
  for (int i = 0; i < 20; ++i) {
    inner_update(state, {0.1 * i - 1.0, 0.3}, 1e-3, 1e-4,
                 UpdatePhase::kDeploy);
  }
  CHECK(state.phi_checksum() == phi_before);
  CHECK(state.theta_checksum() != theta_before);
}

TEST_CASE("meta-train-phase updates move phi too") {
  ModelState state = tiny_state(3);
  const std::uint64_t phi_before = state.phi_checksum();
  inner_update(state, {0.5, 0.4}, 1e-3, 1e-4, UpdatePhase::kMetaTrain);
  CHECK(state.phi_checksum() != phi_before);
}

TEST_CASE("a small step on a fixed sample does not increase its loss") {
  ModelState state = tiny_state(4);
  const Sample s{1.2, -0.4};
  const double before = inner_update(state, s, 1e-4, 0.0,
                                     UpdatePhase::kDeploy);
  const double pred = state.network().predict(s.x);
  const double after = (pred - s.y) * (pred - s.y);
  CHECK(after <= before + 1e-9);
}

TEST_CASE("memory loss is zero when the network reproduces the history") {
  ModelState state = tiny_state(5);
  TrajectoryHistory h;
  for (double x : {-4.0, -1.0, 2.0}) {
    h.append({x, state.network().predict(x)});
  }
  CHECK(memory_loss(state, h) == 0.0);
}

TEST_CASE("single-point history off by 0.1 scores 0.01") {
  ModelState state = tiny_state(6);
  TrajectoryHistory h;
  const double x = 0.7;
  h.append({x, state.network().predict(x) + 0.1});
  CHECK(memory_loss(state, h) == doctest::Approx(0.01).epsilon(1e-10));
}

TEST_CASE("memory loss equals an independent per-point loop") {
  ModelState state = tiny_state(7);
  RngStream rng(7);
  TrajectoryHistory h;
  for (int i = 0; i < 40; ++i) {
    h.append({rng.uniform(-5.0, 5.0), rng.symmetric(0.8)});
  }
  const double batched = memory_loss(state, h);

  const oracle::LoopNetwork ref = oracle::snapshot(state.network());
  double acc = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double pred = oracle::loop_forward(ref, {h.xs()[i]})[0];
    const double d = pred - h.ys()[i];
    acc += d * d;
  }
  CHECK(std::fabs(batched - acc / static_cast<double>(h.size())) <= 1e-12);
}

TEST_CASE("memory loss requires a non-empty history") {
  ModelState state = tiny_state(8);
  TrajectoryHistory h;
  CHECK_THROWS_AS(memory_loss(state, h), ContractError);
  CHECK_THROWS_AS(meta_update(state, h, 1e-4), ContractError);
}

TEST_CASE("meta updates touch phi only") {
  ModelState state = tiny_state(9);
  RngStream rng(9);
  TrajectoryHistory h;
  for (int i = 0; i < 10; ++i) {
    h.append({rng.uniform(-5.0, 5.0), rng.symmetric(0.8)});
  }

  const std::uint64_t theta_before = state.theta_checksum();
  const std::uint64_t phi_before = state.phi_checksum();
  meta_update(state, h, 0.0);
  CHECK(state.phi_checksum() == phi_before);  // gamma = 0

  const double loss_before_step = memory_loss(state, h);
  const double reported = meta_update(state, h, 1e-3);
  CHECK(state.theta_checksum() == theta_before);
  CHECK(state.phi_checksum() != phi_before);
  CHECK(reported == loss_before_step);
}

TEST_CASE("repeated meta updates descend on a frozen history") {
  ModelState state = tiny_state(10);
  RngStream rng(10);
  TrajectoryHistory h;
  for (int i = 0; i < 30; ++i) {
    h.append({rng.uniform(-5.0, 5.0), rng.symmetric(0.8)});
  }
  double prev = memory_loss(state, h);
  for (int k = 0; k < 3; ++k) {
    meta_update(state, h, 1e-3);
    const double now = memory_loss(state, h);
    CHECK(now < prev);
    prev = now;
  }
}

TEST_CASE("zero meta-epochs leave phi at its initialization") {
  TrainConfig cfg = tiny_config();
  cfg.meta_epochs = 0;
  const NetworkOfDANs fresh = NetworkOfDANs::init(cfg.topology, cfg.sharing,
                                                  cfg.dan_shape, cfg.seed);
  MetaTrainResult result = meta_train(cfg);
  CHECK(result.records.empty());
  CHECK(result.state.phi_checksum() == fresh.checksum(ParamSubset::kPhi));
  CHECK(result.state.theta_checksum() ==
        fresh.checksum(ParamSubset::kTheta));
}

TEST_CASE("theta resets to its initialization at every meta-epoch") {
  TrainConfig cfg = tiny_config(11);
  cfg.meta_epochs = 3;
  std::vector<std::uint64_t> at_start;
  MetaTrainHooks hooks;
  hooks.on_epoch_start = [&](int, const ModelState& s) {
    at_start.push_back(s.theta_checksum());
  };
  MetaTrainResult result = meta_train(cfg, &hooks);
  CHECK(at_start.size() == 3);
  const std::uint64_t theta0 = result.state.theta0_checksum();
  for (std::uint64_t cs : at_start) CHECK(cs == theta0);
  CHECK(result.state.theta_checksum() == theta0);  // final reset too
  CHECK(result.functions.size() == 3);
  CHECK(result.records.size() == 3);
  for (const MetaEpochRecord& rec : result.records) {
    CHECK(std::isfinite(rec.memory_loss));
    CHECK(std::isfinite(rec.total_loss));
  }
}

TEST_CASE("meta-training is bit-deterministic given the seed") {
  const TrainConfig cfg = tiny_config(12);
  MetaTrainResult a = meta_train(cfg);
  MetaTrainResult b = meta_train(cfg);
  CHECK(a.state.phi_checksum() == b.state.phi_checksum());
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].memory_loss == b.records[i].memory_loss);
    CHECK(a.records[i].total_loss == b.records[i].total_loss);
  }
}

TEST_CASE("deployment freezes phi and grows the history stage by stage") {
  ModelState state = tiny_state(13);
  RngStream task_rng = make_stream(13, "task");
  const TargetFunction f = sample_target_function(task_rng);
  RngStream data_rng = make_stream(13, "data");

  DeployConfig cfg;
  cfg.inner_steps = 7;
  cfg.grid_points = 40;

  const std::uint64_t phi_before = state.phi_checksum();
  std::vector<std::size_t> history_sizes;
  DeployHooks hooks;
  hooks.after_stage = [&](int stage, const ModelState& s,
                          const TrajectoryHistory& h) {
    history_sizes.push_back(h.size());
    CHECK(s.phi_checksum() == phi_before);
  };
  const std::vector<StageRecord> records =
      deploy(state, f, cfg, data_rng, &hooks);

  CHECK(state.phi_checksum() == phi_before);
  REQUIRE(records.size() == 6);
  CHECK(std::isnan(records[0].memory_loss));
  for (int stage = 1; stage <= 5; ++stage) {
    CHECK(records[static_cast<std::size_t>(stage)].stage == stage);
    CHECK(std::isfinite(records[static_cast<std::size_t>(stage)].memory_loss));
  }
  // |H| after stage s is s * inner_steps.
  REQUIRE(history_sizes.size() == 6);
  for (std::size_t s = 0; s < history_sizes.size(); ++s) {
    CHECK(history_sizes[s] == s * 7);
  }
}

TEST_CASE("plastic-phi deployment does update phi") {
  ModelState state = tiny_state(14);
  RngStream task_rng = make_stream(14, "task");
  const TargetFunction f = sample_target_function(task_rng);
  RngStream data_rng = make_stream(14, "data");
  DeployConfig cfg;
  cfg.inner_steps = 5;
  cfg.grid_points = 40;
  cfg.plastic_phi = true;
  const std::uint64_t phi_before = state.phi_checksum();
  deploy(state, f, cfg, data_rng);
  CHECK(state.phi_checksum() != phi_before);
}

TEST_CASE("non-finite values abort with a divergence error") {
  ModelState state = tiny_state(15);
  auto theta = state.network().parameters(ParamSubset::kTheta);
  (*theta[0].tensor)[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(inner_update(state, {0.5, 0.1}, 1e-3, 1e-4,
                               UpdatePhase::kMetaTrain, 42),
                  DivergenceError);

  ModelState state2 = tiny_state(16);
  auto phi = state2.network().parameters(ParamSubset::kPhi);
  (*phi[0].tensor)[0] = std::numeric_limits<double>::infinity();
  TrajectoryHistory h;
  h.append({0.5, 0.1});
  CHECK_THROWS_AS(meta_update(state2, h, 1e-4), DivergenceError);

  try {
    ModelState state3 = tiny_state(15);
    auto t3 = state3.network().parameters(ParamSubset::kTheta);
    (*t3[0].tensor)[0] = std::numeric_limits<double>::quiet_NaN();
    inner_update(state3, {0.5, 0.1}, 1e-3, 1e-4, UpdatePhase::kMetaTrain,
                 42);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(e.step() == 42);
  }
}

TEST_CASE("the adaptive-moment variant trains and stays deterministic") {
  TrainConfig cfg = tiny_config(17);
  cfg.optimizer = OptimizerKind::kAdam;
  MetaTrainResult a = meta_train(cfg);
  MetaTrainResult b = meta_train(cfg);
  CHECK(a.state.phi_checksum() == b.state.phi_checksum());

  cfg.optimizer = OptimizerKind::kSgd;
  MetaTrainResult c = meta_train(cfg);
  CHECK(a.state.phi_checksum() != c.state.phi_checksum());
}

TEST_CASE("config validation rejects bad hyperparameters") {
  TrainConfig cfg = tiny_config();
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg = tiny_config();
  cfg.gamma = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg = tiny_config();
  cfg.inner_steps = 0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
}
