#include "danet/training.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace danet {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

// Forward + loss over a sample batch; xs/ys must be equal length.
struct BatchGraph {
  Tape tape;
  ForwardGraph graph;
  ValueId loss;
};

void build_batch_loss(BatchGraph& bg, const NetworkOfDANs& net,
                      std::span<const double> xs, std::span<const double> ys) {
  Tensor x(xs.size(), 1, std::vector<double>(xs.begin(), xs.end()));
  Tensor y(ys.size(), 1, std::vector<double>(ys.begin(), ys.end()));
  bg.graph = net.build_forward(bg.tape, x);
  bg.loss = bg.tape.mse(bg.graph.prediction, bg.tape.leaf(y));
}

std::vector<std::span<const double>> collect_grads(
    const Tape& tape, std::span<const ValueId> leaves) {
  std::vector<std::span<const double>> out;
  out.reserve(leaves.size());
  for (ValueId v : leaves) out.push_back(tape.grad(v));
  return out;
}

double mse_over_points(const NetworkOfDANs& net, std::span<const double> xs,
                       std::span<const double> ys) {
  Tape tape;
  Tensor x(xs.size(), 1, std::vector<double>(xs.begin(), xs.end()));
  ForwardGraph g = net.build_forward(tape, x);
  auto pred = tape.value(g.prediction);
  double acc = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double d = pred[i] - ys[i];
    acc += d * d;
  }
  return acc / static_cast<double>(ys.size());
}

}  // namespace

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

OptimizerKind optimizer_kind_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::kSgd;
  if (s == "adam") return OptimizerKind::kAdam;
  throw ArgumentError("unknown optimizer '" + s + "' (expected sgd | adam)");
}

void Optimizer::step(std::span<Tensor* const> params,
                     std::span<const std::span<const double>> grads,
                     double lr) {
  if (lr == 0.0) return;
  if (kind_ == OptimizerKind::kSgd) {
    for (std::size_t p = 0; p < params.size(); ++p) {
      double* w = params[p]->data();
      const std::span<const double> g = grads[p];
      for (std::size_t i = 0; i < g.size(); ++i) w[i] -= lr * g[i];
    }
    return;
  }

  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  if (m_.size() != params.size()) {
    m_.assign(params.size(), {});
    v_.assign(params.size(), {});
    for (std::size_t p = 0; p < params.size(); ++p) {
      m_[p].assign(params[p]->size(), 0.0);
      v_[p].assign(params[p]->size(), 0.0);
    }
    t_ = 0;
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  for (std::size_t p = 0; p < params.size(); ++p) {
    double* w = params[p]->data();
    const std::span<const double> g = grads[p];
    for (std::size_t i = 0; i < g.size(); ++i) {
      m_[p][i] = kBeta1 * m_[p][i] + (1.0 - kBeta1) * g[i];
      v_[p][i] = kBeta2 * v_[p][i] + (1.0 - kBeta2) * g[i] * g[i];
      w[i] -= lr * (m_[p][i] / bc1) / (std::sqrt(v_[p][i] / bc2) + kEps);
    }
  }
}

void Optimizer::reset() {
  t_ = 0;
  m_.clear();
  v_.clear();
}

void TrainConfig::validate() const {
  topology.validate();
  if (dan_shape.in != topology.n_channels) {
    throw ConstructionError("dan_shape.in must equal n_channels");
  }
  if (!(alpha > 0.0)) throw ArgumentError("alpha must be > 0");
  if (gamma < 0.0) throw ArgumentError("gamma must be >= 0");
  if (inner_steps < 1) throw ArgumentError("inner_steps must be >= 1");
  if (meta_epochs < 0) throw ArgumentError("meta_epochs must be >= 0");
  if (grid_points < 2) throw ArgumentError("grid_points must be >= 2");
}

ModelState::ModelState(NetworkOfDANs net) : net_(std::move(net)) {
  for (const Tensor* t : net_.theta_tensors()) theta0_.push_back(*t);
}

void ModelState::reset_theta() {
  auto ts = net_.theta_tensors();
  for (std::size_t i = 0; i < ts.size(); ++i) *ts[i] = theta0_[i];
}

std::uint64_t ModelState::theta0_checksum() const {
  std::vector<const Tensor*> ts;
  for (const Tensor& t : theta0_) ts.push_back(&t);
  return checksum_tensors(ts);
}

double inner_update(ModelState& state, const Sample& sample, double alpha,
                    double gamma, UpdatePhase phase, Optimizer& theta_opt,
                    Optimizer& phi_opt, long step_index) {
  NetworkOfDANs& net = state.network();
  BatchGraph bg;
  const double xs[] = {sample.x};
  const double ys[] = {sample.y};
  build_batch_loss(bg, net, xs, ys);
  const double loss = bg.tape.scalar(bg.loss);
  if (!std::isfinite(loss)) {
    throw DivergenceError("inner_update: non-finite task loss", step_index);
  }

  bg.tape.backward(bg.loss);
  auto theta = net.theta_tensors();
  theta_opt.step(theta, collect_grads(bg.tape, bg.graph.theta_leaves), alpha);
  if (phase == UpdatePhase::kMetaTrain) {
    auto phi = net.phi_tensors();
    phi_opt.step(phi, collect_grads(bg.tape, bg.graph.phi_leaves), gamma);
  }
  return loss;
}

double inner_update(ModelState& state, const Sample& sample, double alpha,
                    double gamma, UpdatePhase phase, long step_index) {
  Optimizer theta_opt, phi_opt;
  return inner_update(state, sample, alpha, gamma, phase, theta_opt, phi_opt,
                      step_index);
}

double memory_loss(const ModelState& state, const TrajectoryHistory& history) {
  if (history.empty()) {
    throw ContractError("memory_loss: empty trajectory history");
  }
  return mse_over_points(state.network(), history.xs(), history.ys());
}

double total_loss(const ModelState& state, const TargetFunction& f,
                  int grid_points) {
  std::vector<Sample> grid = full_function_grid(f, grid_points);
  std::vector<double> xs, ys;
  xs.reserve(grid.size());
  ys.reserve(grid.size());
  for (const Sample& s : grid) {
    xs.push_back(s.x);
    ys.push_back(s.y);
  }
  return mse_over_points(state.network(), xs, ys);
}

double meta_update(ModelState& state, const TrajectoryHistory& history,
                   double gamma, Optimizer& phi_opt, long step_index) {
  if (history.empty()) {
    throw ContractError("meta_update: empty trajectory history");
  }
  NetworkOfDANs& net = state.network();
  BatchGraph bg;
  build_batch_loss(bg, net, history.xs(), history.ys());
  const double loss = bg.tape.scalar(bg.loss);
  if (!std::isfinite(loss)) {
    throw DivergenceError("meta_update: non-finite memory loss", step_index);
  }

  bg.tape.backward(bg.loss);
  auto grads = collect_grads(bg.tape, bg.graph.phi_leaves);
  for (const auto& g : grads) {
    for (double v : g) {
      if (!std::isfinite(v)) {
        throw DivergenceError("meta_update: non-finite phi gradient",
                              step_index);
      }
    }
  }
  auto phi = net.phi_tensors();
  phi_opt.step(phi, grads, gamma);
  return loss;
}

double meta_update(ModelState& state, const TrajectoryHistory& history,
                   double gamma, long step_index) {
  Optimizer phi_opt;
  return meta_update(state, history, gamma, phi_opt, step_index);
}

MetaTrainResult meta_train(const TrainConfig& config,
                           const MetaTrainHooks* hooks) {
  config.validate();
  NetworkOfDANs net = NetworkOfDANs::init(config.topology, config.sharing,
                                          config.dan_shape, config.seed);
  MetaTrainResult result{ModelState(std::move(net)), {}, {}};
  ModelState& state = result.state;

  RngStream task_rng = make_stream(config.seed, "task");
  RngStream data_rng = make_stream(config.seed, "data");
  Optimizer theta_opt(config.optimizer);
  Optimizer phi_opt(config.optimizer);

  TrajectoryHistory history;
  long step = 0;
  for (int epoch = 0; epoch < config.meta_epochs; ++epoch) {
    const auto t0 = Clock::now();
    if (hooks && hooks->on_epoch_start) hooks->on_epoch_start(epoch, state);

    const TargetFunction f = sample_target_function(task_rng);
    result.functions.push_back(f);
    history.clear();

    double epoch_memory_loss = std::numeric_limits<double>::quiet_NaN();
    for (const SubTask& st : sub_task_windows()) {
      const std::vector<Sample> batch =
          sample_batch(f, st, config.inner_steps, data_rng);
      for (const Sample& s : batch) {
        inner_update(state, s, config.alpha, config.gamma,
                     UpdatePhase::kMetaTrain, theta_opt, phi_opt, step);
        history.append(s);
        ++step;
      }
      // Memory loss over everything seen so far, then one phi-only step.
      epoch_memory_loss = meta_update(state, history, config.gamma, phi_opt,
                                      step);
    }

    MetaEpochRecord rec;
    rec.epoch = epoch;
    rec.memory_loss = epoch_memory_loss;
    rec.total_loss = total_loss(state, f, config.grid_points);
    rec.wall_ms = ms_since(t0);
    result.records.push_back(rec);
    if (hooks && hooks->on_epoch_end) hooks->on_epoch_end(rec);

    state.reset_theta();
    theta_opt.reset();
  }
  return result;
}

std::vector<StageRecord> deploy(ModelState& state, const TargetFunction& f,
                                const DeployConfig& cfg, RngStream& data_rng,
                                const DeployHooks* hooks) {
  std::vector<StageRecord> records;
  const auto t0 = Clock::now();

  StageRecord before;
  before.stage = 0;
  before.total_loss = total_loss(state, f, cfg.grid_points);
  before.memory_loss = std::numeric_limits<double>::quiet_NaN();
  before.wall_ms = ms_since(t0);
  records.push_back(before);
  TrajectoryHistory history;
  if (hooks && hooks->after_stage) hooks->after_stage(0, state, history);

  const UpdatePhase phase =
      cfg.plastic_phi ? UpdatePhase::kMetaTrain : UpdatePhase::kDeploy;
  Optimizer theta_opt(cfg.optimizer);
  Optimizer phi_opt(cfg.optimizer);
  long step = 0;
  for (const SubTask& st : sub_task_windows()) {
    const auto stage_start = Clock::now();
    const std::vector<Sample> batch =
        sample_batch(f, st, cfg.inner_steps, data_rng);
    for (const Sample& s : batch) {
      inner_update(state, s, cfg.alpha, cfg.gamma, phase, theta_opt, phi_opt,
                   step);
      history.append(s);
      ++step;
    }
    StageRecord rec;
    rec.stage = st.index + 1;
    rec.total_loss = total_loss(state, f, cfg.grid_points);
    rec.memory_loss = memory_loss(state, history);
    rec.wall_ms = ms_since(stage_start);
    records.push_back(rec);
    if (hooks && hooks->after_stage) {
      hooks->after_stage(rec.stage, state, history);
    }
  }
  return records;
}

}  // namespace danet
