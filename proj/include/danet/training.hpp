#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "danet/network.hpp"
#include "danet/tasks.hpp"

namespace danet {

enum class UpdatePhase {
  kMetaTrain,  // task-loss step on both theta and phi
  kDeploy,     // task-loss step on theta only; phi is held fixed
};

enum class OptimizerKind { kSgd, kAdam };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(const std::string& s);

/// First-order parameter updater. Plain SGD by default; the
/// adaptive-moment variant is an exploration flag and keeps per-parameter
/// moment estimates across steps.
class Optimizer {
 public:
  explicit Optimizer(OptimizerKind kind = OptimizerKind::kSgd)
      : kind_(kind) {}

  void step(std::span<Tensor* const> params,
            std::span<const std::span<const double>> grads, double lr);
  void reset();

 private:
  OptimizerKind kind_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

struct TrainConfig {
  Topology topology = make_topology({1, 40, 40, 1}, 40);
  PhenotypeShape dan_shape{40, 15, 8};
  SharingMode sharing = SharingMode::kSingle;
  std::uint64_t seed = 1;
  double alpha = 1e-3;   // VEC (theta) learning rate
  double gamma = 1e-4;   // phenotype (phi) learning rate
  int inner_steps = 100;
  int meta_epochs = 300;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  int grid_points = 500;  // total-loss evaluation grid

  void validate() const;
};

/// A network plus the frozen snapshot of its VEC initialization, so the
/// meta-training loop can reset theta between task sequences.
class ModelState {
 public:
  explicit ModelState(NetworkOfDANs net);

  NetworkOfDANs& network() { return net_; }
  const NetworkOfDANs& network() const { return net_; }

  /// theta <- theta_0 (bit-exact).
  void reset_theta();

  std::uint64_t theta_checksum() const {
    return net_.checksum(ParamSubset::kTheta);
  }
  std::uint64_t phi_checksum() const {
    return net_.checksum(ParamSubset::kPhi);
  }
  std::uint64_t theta0_checksum() const;

 private:
  NetworkOfDANs net_;
  std::vector<Tensor> theta0_;
};

/// One task-loss SGD step on a single sample. In the meta-train phase both
/// theta (rate alpha) and phi (rate gamma) move; in the deploy phase only
/// theta moves and phi stays bit-identical.
double inner_update(ModelState& state, const Sample& sample, double alpha,
                    double gamma, UpdatePhase phase, Optimizer& theta_opt,
                    Optimizer& phi_opt, long step_index = -1);
double inner_update(ModelState& state, const Sample& sample, double alpha,
                    double gamma, UpdatePhase phase, long step_index = -1);

/// Mean squared prediction error over every sample stored in the history.
double memory_loss(const ModelState& state, const TrajectoryHistory& history);

/// Mean squared prediction error over an n-point grid spanning the domain.
double total_loss(const ModelState& state, const TargetFunction& f,
                  int grid_points);

/// One memory-loss step on phi only; theta is untouched bit-for-bit.
/// Returns the memory loss measured before the step.
double meta_update(ModelState& state, const TrajectoryHistory& history,
                   double gamma, Optimizer& phi_opt, long step_index = -1);
double meta_update(ModelState& state, const TrajectoryHistory& history,
                   double gamma, long step_index = -1);

struct MetaEpochRecord {
  int epoch = 0;
  double memory_loss = 0;  // over the full trajectory, end of epoch
  double total_loss = 0;   // over the evaluation grid, end of epoch
  double wall_ms = 0;
};

struct MetaTrainHooks {
  std::function<void(int epoch, const ModelState&)> on_epoch_start;
  std::function<void(const MetaEpochRecord&)> on_epoch_end;
};

struct MetaTrainResult {
  ModelState state;  // trained phi; theta reset to its initialization
  std::vector<MetaEpochRecord> records;
  std::vector<TargetFunction> functions;  // one per meta-epoch
};

/// Meta-training driver. Per meta-epoch: sample a target function, run the
/// five sub-tasks in sequence (inner_steps single-sample updates each,
/// then one phenotype meta-update on the trajectory so far), and finally
/// reset theta to its initialization.
MetaTrainResult meta_train(const TrainConfig& config,
                           const MetaTrainHooks* hooks = nullptr);

struct DeployConfig {
  double alpha = 1e-3;
  double gamma = 1e-4;  // used only when plastic_phi is set
  int inner_steps = 100;
  int grid_points = 500;
  bool plastic_phi = false;
  OptimizerKind optimizer = OptimizerKind::kSgd;
};

struct StageRecord {
  int stage = 0;           // 0 = before any update
  double total_loss = 0;
  double memory_loss = 0;  // NaN at stage 0 (empty history)
  double wall_ms = 0;
};

struct DeployHooks {
  std::function<void(int stage, const ModelState&, const TrajectoryHistory&)>
      after_stage;
};

/// Sequential deployment on one target function: five sub-task stages of
/// inner_steps updates each. Returns 6 records (stage 0 plus one per
/// stage). phi is frozen unless cfg.plastic_phi is set.
std::vector<StageRecord> deploy(ModelState& state, const TargetFunction& f,
                                const DeployConfig& cfg, RngStream& data_rng,
                                const DeployHooks* hooks = nullptr);

}  // namespace danet
