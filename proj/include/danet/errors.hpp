#pragma once

#include <stdexcept>
#include <string>

namespace danet {

// Dimension disagreement in a tensor op; message names both shapes.
class ShapeError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Slice or index outside the owning container.
class BoundsError : public std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Malformed argument (empty operand list, bad enum string, ...).
class ArgumentError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Violated call contract: non-scalar backward loss, empty history, ...
class ContractError : public std::logic_error {
  using std::logic_error::logic_error;
};

// Invalid topology or network construction request.
class ConstructionError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Rejection sampling exhausted its retry cap.
class SamplingError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unreadable, corrupt, or version-incompatible checkpoint.
class CheckpointError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Config schema violation; message carries the offending field path.
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite loss or gradient during training; carries the step index at
// which the run was aborted.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"),
        step_(step) {}

  long step() const noexcept { return step_; }

 private:
  long step_;
};

}  // namespace danet
