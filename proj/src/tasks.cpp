#include "danet/tasks.hpp"

#include <cmath>
#include <numbers>

#include "danet/errors.hpp"

namespace danet {

namespace {

constexpr double kAmpHi = 2.0;
constexpr double kPhaseHi = std::numbers::pi / 3.0;
constexpr double kOutputBound = 0.8;
constexpr double kMinRange = 0.4;
constexpr int kRejectionCap = 100000;

}  // namespace

double TargetFunction::evaluate(double x) const {
  return a0 * std::sin(r0 * x + o0) + a1 * std::sin(r1 * x + o1);
}

const std::array<SubTask, kNumSubTasks>& sub_task_windows() {
  static const std::array<SubTask, kNumSubTasks> windows = {{
      {0, -5.0, -3.0, false},
      {1, -3.0, -1.0, false},
      {2, -1.0, 1.0, false},
      {3, 1.0, 3.0, false},
      {4, 3.0, 5.0, true},
  }};
  return windows;
}

GridExtrema grid_extrema(const TargetFunction& f, int grid_points) {
  const double step = (kDomainHi - kDomainLo) / (grid_points - 1);
  GridExtrema e{f.evaluate(kDomainLo), f.evaluate(kDomainLo)};
  for (int i = 1; i < grid_points; ++i) {
    const double y = f.evaluate(kDomainLo + step * i);
    if (y < e.y_min) e.y_min = y;
    if (y > e.y_max) e.y_max = y;
  }
  return e;
}

bool passes_filter(const TargetFunction& f, int grid_points) {
  const double step = (kDomainHi - kDomainLo) / (grid_points - 1);
  double y_min = f.evaluate(kDomainLo);
  double y_max = y_min;
  for (int i = 0; i < grid_points; ++i) {
    const double y = f.evaluate(kDomainLo + step * i);
    // The amplitude bounds can fail early; the range bound needs the
    // full scan.
    if (y > kOutputBound || y < -kOutputBound) return false;
    if (y < y_min) y_min = y;
    if (y > y_max) y_max = y;
  }
  return y_max - y_min >= kMinRange;
}

TargetFunction sample_candidate(RngStream& rng) {
  TargetFunction f;
  f.a0 = rng.uniform(0.0, kAmpHi);
  f.a1 = rng.uniform(0.0, kAmpHi);
  f.r0 = rng.uniform(0.0, kPhaseHi);
  f.r1 = rng.uniform(0.0, kPhaseHi);
  f.o0 = rng.uniform(kDomainLo, kDomainHi);
  f.o1 = rng.uniform(kDomainLo, kDomainHi);
  return f;
}

TargetFunction sample_target_function(RngStream& rng) {
  for (int attempt = 0; attempt < kRejectionCap; ++attempt) {
    TargetFunction f = sample_candidate(rng);
    if (passes_filter(f)) return f;
  }
  throw SamplingError("target-function rejection sampling exhausted " +
                      std::to_string(kRejectionCap) + " candidates");
}

std::vector<Sample> sample_batch(const TargetFunction& f, const SubTask& st,
                                 int n, RngStream& rng) {
  if (n < 1) {
    throw ArgumentError("sample_batch: n must be >= 1, got " +
                        std::to_string(n));
  }
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform(st.lo, st.hi);
    out.push_back({x, f.evaluate(x)});
  }
  return out;
}

std::vector<Sample> full_function_grid(const TargetFunction& f,
                                       int n_points) {
  if (n_points < 2) {
    throw ArgumentError("full_function_grid: need at least 2 points, got " +
                        std::to_string(n_points));
  }
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(n_points));
  const double step = (kDomainHi - kDomainLo) / (n_points - 1);
  for (int i = 0; i < n_points; ++i) {
    const double x = kDomainLo + step * i;
    out.push_back({x, f.evaluate(x)});
  }
  return out;
}

}  // namespace danet
