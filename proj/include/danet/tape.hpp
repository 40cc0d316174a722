#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "danet/tensor.hpp"

namespace danet {

/// Handle to a value recorded on a Tape.
struct ValueId {
  std::uint32_t index = std::numeric_limits<std::uint32_t>::max();

  constexpr bool valid() const {
    return index != std::numeric_limits<std::uint32_t>::max();
  }
  friend constexpr bool operator==(ValueId, ValueId) = default;
};

enum class Op : std::uint8_t {
  kLeaf,
  kMatmul,
  kAdd,       // same shape, or [m×n] + [1×n] broadcast over rows
  kTanh,
  kSliceCols,
  kConcatCols,
  kSum,       // sum of all elements -> 1×1
  kScale,     // multiply by a compile-time constant
  kMse,       // mean squared element difference -> 1×1
};

/// Reverse-mode autodiff tape over dense double matrices.
///
/// Operations are recorded in execution order, which is also a topological
/// order (an operand always precedes its consumer), so one reverse sweep
/// visits every node exactly once. Values and gradients live in flat arenas;
/// spans returned by value()/grad() are invalidated by the next recorded
/// operation, backward() or reset().
class Tape {
 public:
  ValueId leaf(const Tensor& value);
  ValueId leaf(std::span<const double> data, std::size_t rows,
               std::size_t cols);

  ValueId matmul(ValueId a, ValueId b);
  ValueId add(ValueId a, ValueId b);
  ValueId tanh(ValueId a);
  ValueId slice_cols(ValueId a, std::size_t start, std::size_t len);
  ValueId concat_cols(std::span<const ValueId> parts);
  ValueId sum(ValueId a);
  ValueId scale(ValueId a, double factor);
  ValueId mse(ValueId pred, ValueId target);

  std::size_t size() const { return nodes_.size(); }
  std::size_t rows(ValueId v) const { return node(v).rows; }
  std::size_t cols(ValueId v) const { return node(v).cols; }
  std::span<const double> value(ValueId v) const;
  double scalar(ValueId v) const;
  Tensor tensor(ValueId v) const;

  /// Accumulates d(loss)/d(node) for every node reachable from `loss`
  /// into the gradient arena. `loss` must be 1×1.
  void backward(ValueId loss);

  /// Gradient of the node from the most recent backward() call.
  std::span<const double> grad(ValueId v) const;

  /// backward() restricted to a parameter subset: returns d(loss)/d(p) for
  /// each p in `wrt`, in order. Nodes outside `wrt` receive no gradient in
  /// the result; a parameter the loss does not depend on gets zeros.
  std::vector<Tensor> gradients(ValueId loss, std::span<const ValueId> wrt);

  /// Recomputes every non-leaf value in place from its operands. Replay of
  /// a tape reproduces the recorded values bit-for-bit.
  void replay_forward();

  /// Clears all nodes but keeps arena capacity for reuse.
  void reset();

 private:
  struct Node {
    Op op;
    std::uint32_t rows, cols;
    std::size_t offset;  // into value/grad arenas
    std::uint32_t args_begin, args_count;
    std::uint32_t aux0 = 0, aux1 = 0;  // slice start/len
    double factor = 0.0;               // scale constant
  };

  const Node& node(ValueId v) const;
  ValueId push(Op op, std::size_t rows, std::size_t cols,
               std::span<const ValueId> args, std::uint32_t aux0 = 0,
               std::uint32_t aux1 = 0, double factor = 0.0);
  double* value_ptr(const Node& n) { return values_.data() + n.offset; }
  const double* value_ptr(const Node& n) const {
    return values_.data() + n.offset;
  }
  void compute(const Node& n);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> args_;
  std::vector<double> values_;
  std::vector<double> grads_;
  bool has_grads_ = false;
};

}  // namespace danet
