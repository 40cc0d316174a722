#include "danet/gradcheck.hpp"

#include <cmath>

namespace danet {

namespace {

double batch_loss(const NetworkOfDANs& net, std::span<const double> xs,
                  std::span<const double> ys, std::size_t in_width,
                  std::size_t out_width) {
  Tape tape;
  Tensor x(xs.size() / in_width, in_width,
           std::vector<double>(xs.begin(), xs.end()));
  ForwardGraph g = net.build_forward(tape, x);
  Tensor y(ys.size() / out_width, out_width,
           std::vector<double>(ys.begin(), ys.end()));
  return tape.scalar(tape.mse(g.prediction, tape.leaf(y)));
}

}  // namespace

GradCheckReport gradcheck_network(NetworkOfDANs& net,
                                  std::span<const double> xs,
                                  std::span<const double> ys,
                                  const GradCheckSettings& settings) {
  const std::size_t in_width = net.topology().layer_sizes.front();
  const std::size_t out_width = net.topology().output_width();

  // Autodiff gradients at the current parameter values.
  Tape tape;
  Tensor x(xs.size() / in_width, in_width,
           std::vector<double>(xs.begin(), xs.end()));
  ForwardGraph g = net.build_forward(tape, x);
  Tensor y(ys.size() / out_width, out_width,
           std::vector<double>(ys.begin(), ys.end()));
  ValueId loss = tape.mse(g.prediction, tape.leaf(y));
  tape.backward(loss);

  std::vector<ParamRef> params = net.parameters(ParamSubset::kBoth);
  std::vector<ValueId> leaves = g.theta_leaves;
  leaves.insert(leaves.end(), g.phi_leaves.begin(), g.phi_leaves.end());

  GradCheckReport report;
  for (std::size_t p = 0; p < params.size(); ++p) {
    TensorGradReport tr;
    tr.name = params[p].name;
    Tensor& t = *params[p].tensor;
    const std::span<const double> ad = tape.grad(leaves[p]);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double saved = t[i];
      t[i] = saved + settings.fd_step;
      const double up = batch_loss(net, xs, ys, in_width, out_width);
      t[i] = saved - settings.fd_step;
      const double down = batch_loss(net, xs, ys, in_width, out_width);
      t[i] = saved;
      const double fd = (up - down) / (2.0 * settings.fd_step);

      const double abs_err = std::fabs(ad[i] - fd);
      const double scale = std::max(std::fabs(ad[i]), std::fabs(fd));
      const double rel_err = scale > 0.0 ? abs_err / scale : 0.0;
      tr.max_abs_err = std::max(tr.max_abs_err, abs_err);
      if (abs_err > settings.abs_floor) {
        tr.max_rel_err = std::max(tr.max_rel_err, rel_err);
        if (rel_err > settings.rel_tolerance) tr.passed = false;
      }
    }
    report.max_rel_err = std::max(report.max_rel_err, tr.max_rel_err);
    if (!tr.passed) {
      report.passed = false;
      if (report.worst_tensor.empty() ||
          tr.max_rel_err >= report.max_rel_err) {
        report.worst_tensor = tr.name;
      }
    }
    report.tensors.push_back(std::move(tr));
  }
  if (report.worst_tensor.empty() && !report.tensors.empty()) {
    double worst = -1.0;
    for (const TensorGradReport& tr : report.tensors) {
      if (tr.max_rel_err > worst) {
        worst = tr.max_rel_err;
        report.worst_tensor = tr.name;
      }
    }
  }
  return report;
}

GradCheckTrial random_gradcheck_trial(RngStream& rng) {
  GradCheckTrial trial;
  const auto pick = [&](std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng.uniform() *
                                         static_cast<double>(hi - lo + 1));
  };

  std::vector<std::size_t> sizes{1};
  sizes.push_back(pick(2, 5));
  if (rng.uniform() < 0.5) sizes.push_back(pick(2, 4));
  sizes.push_back(1);
  const std::size_t channels = pick(1, 4);
  const bool with_skips = rng.uniform() < 0.7;
  trial.topology = make_topology(sizes, channels, with_skips);
  trial.shape = PhenotypeShape{channels, pick(2, 6), pick(2, 4)};

  const double m = rng.uniform();
  trial.sharing = m < 1.0 / 3.0   ? SharingMode::kSingle
                  : m < 2.0 / 3.0 ? SharingMode::kPerLayer
                                  : SharingMode::kPerNode;
  trial.net_seed = rng.next_u64();
  trial.batch = static_cast<int>(pick(1, 3));
  return trial;
}

GradCheckSuiteReport run_gradcheck_suite(int trials, std::uint64_t seed,
                                         const GradCheckSettings& settings) {
  GradCheckSuiteReport suite;
  RngStream rng = make_stream(seed, "gradcheck");
  for (int t = 0; t < trials; ++t) {
    GradCheckTrial trial = random_gradcheck_trial(rng);
    NetworkOfDANs net = NetworkOfDANs::init(trial.topology, trial.sharing,
                                            trial.shape, trial.net_seed);
    std::vector<double> xs, ys;
    for (int b = 0; b < trial.batch; ++b) {
      xs.push_back(rng.uniform(-5.0, 5.0));
      ys.push_back(rng.uniform(-0.8, 0.8));
    }
    GradCheckReport report = gradcheck_network(net, xs, ys, settings);
    suite.max_rel_err = std::max(suite.max_rel_err, report.max_rel_err);
    if (!report.passed) {
      suite.passed = false;
      ++suite.failures;
    }
    suite.trials.emplace_back(std::move(trial), std::move(report));
  }
  return suite;
}

}  // namespace danet
