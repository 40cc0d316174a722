#pragma once

#include <array>
#include <span>
#include <vector>

#include "danet/rng.hpp"

namespace danet {

inline constexpr double kDomainLo = -5.0;
inline constexpr double kDomainHi = 5.0;
inline constexpr int kNumSubTasks = 5;
inline constexpr int kFilterGridPoints = 2001;

/// y(x) = a0·sin(r0·x + o0) + a1·sin(r1·x + o1). One accepted function
/// defines one task sequence.
struct TargetFunction {
  double a0 = 0, a1 = 0;  // amplitudes, sampled from (0, 2)
  double r0 = 0, r1 = 0;  // phases, sampled from (0, pi/3)
  double o0 = 0, o1 = 0;  // x-offsets, sampled from [-5, 5)

  double evaluate(double x) const;
};

/// One of five consecutive width-2 windows partitioning [-5, 5]. Windows
/// are half-open except the last, which includes the right endpoint.
struct SubTask {
  int index = 0;
  double lo = 0, hi = 0;
  bool closed_hi = false;

  bool contains(double x) const {
    return x >= lo && (closed_hi ? x <= hi : x < hi);
  }
};

const std::array<SubTask, kNumSubTasks>& sub_task_windows();

struct Sample {
  double x = 0, y = 0;
};

/// Ordered record of every sample the model has been trained on within the
/// current task sequence. Append-only; cleared between target functions.
class TrajectoryHistory {
 public:
  void append(const Sample& s) {
    xs_.push_back(s.x);
    ys_.push_back(s.y);
  }
  void clear() {
    xs_.clear();
    ys_.clear();
  }
  std::size_t size() const { return xs_.size(); }
  bool empty() const { return xs_.empty(); }
  std::span<const double> xs() const { return xs_; }
  std::span<const double> ys() const { return ys_; }

 private:
  std::vector<double> xs_, ys_;
};

/// Extrema of f on a uniform grid over the full domain.
struct GridExtrema {
  double y_min = 0, y_max = 0;
};
GridExtrema grid_extrema(const TargetFunction& f,
                         int grid_points = kFilterGridPoints);

/// Acceptance filter: keep f only if max y <= 0.8, min y >= -0.8 and
/// (max - min) >= 0.4 on the evaluation grid.
bool passes_filter(const TargetFunction& f,
                   int grid_points = kFilterGridPoints);

/// One raw (unfiltered) coefficient draw.
TargetFunction sample_candidate(RngStream& rng);

/// Rejection-samples candidates until the filter passes.
TargetFunction sample_target_function(RngStream& rng);

/// n points with x drawn uniformly from the sub-task window.
std::vector<Sample> sample_batch(const TargetFunction& f, const SubTask& st,
                                 int n, RngStream& rng);

/// n_points evenly spaced over [-5, 5] inclusive, paired with exact y.
std::vector<Sample> full_function_grid(const TargetFunction& f, int n_points);

}  // namespace danet
