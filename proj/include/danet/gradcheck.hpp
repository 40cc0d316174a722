#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "danet/network.hpp"

namespace danet {

/// Central-finite-difference validation of the backward pass. The
/// reference gradient is built from forward evaluations only, so it is
/// independent of the tape's backward sweep.
struct GradCheckSettings {
  double fd_step = 1e-5;
  double rel_tolerance = 1e-4;
  double abs_floor = 1e-7;
};

struct TensorGradReport {
  std::string name;
  double max_abs_err = 0;
  double max_rel_err = 0;
  bool passed = true;
};

struct GradCheckReport {
  bool passed = true;
  double max_rel_err = 0;
  std::string worst_tensor;
  std::vector<TensorGradReport> tensors;
};

/// Checks every parameter component of `net` against central differences
/// of the batch MSE loss at the current parameter values.
GradCheckReport gradcheck_network(NetworkOfDANs& net,
                                  std::span<const double> xs,
                                  std::span<const double> ys,
                                  const GradCheckSettings& settings = {});

struct GradCheckTrial {
  Topology topology;
  SharingMode sharing = SharingMode::kSingle;
  PhenotypeShape shape;
  std::uint64_t net_seed = 0;
  int batch = 1;
};

/// Small random configuration: depth 3-4, hidden widths <= 5, channels
/// <= 4, compact DAN, random sharing mode, skips on or off.
GradCheckTrial random_gradcheck_trial(RngStream& rng);

struct GradCheckSuiteReport {
  bool passed = true;
  double max_rel_err = 0;
  int failures = 0;
  std::vector<std::pair<GradCheckTrial, GradCheckReport>> trials;
};

GradCheckSuiteReport run_gradcheck_suite(int trials, std::uint64_t seed,
                                         const GradCheckSettings& settings =
                                             {});

}  // namespace danet
