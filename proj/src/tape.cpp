#include "danet/tape.hpp"

#include <cmath>
#include <cstring>

namespace danet {

namespace {

// c[m×n] += a[m×k] · b[k×n]; c must be zeroed by the caller.
void matmul_accum(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t l = 0; l < k; ++l) {
      const double av = arow[l];
      const double* brow = b + l * n;
      for (std::size_t j = 0; j < n; ++j) {
        crow[j] += av * brow[j];
      }
    }
  }
}

}  // namespace

const Tape::Node& Tape::node(ValueId v) const {
  if (!v.valid() || v.index >= nodes_.size()) {
    throw BoundsError("invalid tape value id");
  }
  return nodes_[v.index];
}

ValueId Tape::push(Op op, std::size_t rows, std::size_t cols,
                   std::span<const ValueId> args, std::uint32_t aux0,
                   std::uint32_t aux1, double factor) {
  Node n;
  n.op = op;
  n.rows = static_cast<std::uint32_t>(rows);
  n.cols = static_cast<std::uint32_t>(cols);
  n.offset = values_.size();
  n.args_begin = static_cast<std::uint32_t>(args_.size());
  n.args_count = static_cast<std::uint32_t>(args.size());
  n.aux0 = aux0;
  n.aux1 = aux1;
  n.factor = factor;
  for (ValueId a : args) {
    args_.push_back(a.index);
  }
  values_.resize(values_.size() + rows * cols, 0.0);
  nodes_.push_back(n);
  has_grads_ = false;
  return ValueId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

ValueId Tape::leaf(const Tensor& value) {
  return leaf(value.values(), value.rows(), value.cols());
}

ValueId Tape::leaf(std::span<const double> data, std::size_t rows,
                   std::size_t cols) {
  if (data.size() != rows * cols) {
    throw ShapeError("leaf data length " + std::to_string(data.size()) +
                     " does not match shape " + shape_str(rows, cols));
  }
  ValueId id = push(Op::kLeaf, rows, cols, {});
  std::memcpy(value_ptr(nodes_.back()), data.data(),
              data.size() * sizeof(double));
  return id;
}

ValueId Tape::matmul(ValueId a, ValueId b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.cols != nb.rows) {
    throw ShapeError("matmul: inner dimensions disagree: " +
                     shape_str(na.rows, na.cols) + " · " +
                     shape_str(nb.rows, nb.cols));
  }
  const ValueId args[] = {a, b};
  ValueId id = push(Op::kMatmul, na.rows, nb.cols, args);
  compute(nodes_.back());
  return id;
}

ValueId Tape::add(ValueId a, ValueId b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  const bool same = na.rows == nb.rows && na.cols == nb.cols;
  const bool row_broadcast = nb.rows == 1 && nb.cols == na.cols;
  if (!same && !row_broadcast) {
    throw ShapeError("add: shapes disagree: " + shape_str(na.rows, na.cols) +
                     " + " + shape_str(nb.rows, nb.cols));
  }
  const ValueId args[] = {a, b};
  ValueId id = push(Op::kAdd, na.rows, na.cols, args);
  compute(nodes_.back());
  return id;
}

ValueId Tape::tanh(ValueId a) {
  const Node& na = node(a);
  const ValueId args[] = {a};
  ValueId id = push(Op::kTanh, na.rows, na.cols, args);
  compute(nodes_.back());
  return id;
}

ValueId Tape::slice_cols(ValueId a, std::size_t start, std::size_t len) {
  const Node& na = node(a);
  if (start + len > na.cols) {
    throw BoundsError("slice_cols: [" + std::to_string(start) + ", " +
                      std::to_string(start + len) + ") out of range for " +
                      shape_str(na.rows, na.cols));
  }
  const ValueId args[] = {a};
  ValueId id = push(Op::kSliceCols, na.rows, len, args,
                    static_cast<std::uint32_t>(start),
                    static_cast<std::uint32_t>(len));
  compute(nodes_.back());
  return id;
}

ValueId Tape::concat_cols(std::span<const ValueId> parts) {
  if (parts.empty()) {
    throw ArgumentError("concat_cols: empty part list");
  }
  const std::size_t rows = node(parts.front()).rows;
  std::size_t cols = 0;
  for (ValueId p : parts) {
    const Node& np = node(p);
    if (np.rows != rows) {
      throw ShapeError("concat_cols: row counts disagree: " +
                       shape_str(rows, node(parts.front()).cols) + " vs " +
                       shape_str(np.rows, np.cols));
    }
    cols += np.cols;
  }
  ValueId id = push(Op::kConcatCols, rows, cols, parts);
  compute(nodes_.back());
  return id;
}

ValueId Tape::sum(ValueId a) {
  const ValueId args[] = {a};
  ValueId id = push(Op::kSum, 1, 1, args);
  compute(nodes_.back());
  return id;
}

ValueId Tape::scale(ValueId a, double factor) {
  const Node& na = node(a);
  const ValueId args[] = {a};
  ValueId id = push(Op::kScale, na.rows, na.cols, args, 0, 0, factor);
  compute(nodes_.back());
  return id;
}

ValueId Tape::mse(ValueId pred, ValueId target) {
  const Node& np = node(pred);
  const Node& nt = node(target);
  if (np.rows != nt.rows || np.cols != nt.cols) {
    throw ShapeError("mse: shapes disagree: " + shape_str(np.rows, np.cols) +
                     " vs " + shape_str(nt.rows, nt.cols));
  }
  if (np.rows * np.cols == 0) {
    throw ShapeError("mse: empty operands");
  }
  const ValueId args[] = {pred, target};
  ValueId id = push(Op::kMse, 1, 1, args);
  compute(nodes_.back());
  return id;
}

void Tape::compute(const Node& n) {
  double* out = value_ptr(n);
  const std::size_t count = std::size_t{n.rows} * n.cols;
  switch (n.op) {
    case Op::kLeaf:
      break;
    case Op::kMatmul: {
      const Node& a = nodes_[args_[n.args_begin]];
      const Node& b = nodes_[args_[n.args_begin + 1]];
      matmul_accum(value_ptr(a), value_ptr(b), out, a.rows, a.cols, b.cols);
      break;
    }
    case Op::kAdd: {
      const Node& a = nodes_[args_[n.args_begin]];
      const Node& b = nodes_[args_[n.args_begin + 1]];
      const double* pa = value_ptr(a);
      const double* pb = value_ptr(b);
      if (b.rows == a.rows) {
        for (std::size_t i = 0; i < count; ++i) out[i] = pa[i] + pb[i];
      } else {  // row broadcast
        for (std::size_t i = 0; i < n.rows; ++i) {
          for (std::size_t j = 0; j < n.cols; ++j) {
            out[i * n.cols + j] = pa[i * n.cols + j] + pb[j];
          }
        }
      }
      break;
    }
    case Op::kTanh: {
      const double* pa = value_ptr(nodes_[args_[n.args_begin]]);
      for (std::size_t i = 0; i < count; ++i) out[i] = std::tanh(pa[i]);
      break;
    }
    case Op::kSliceCols: {
      const Node& a = nodes_[args_[n.args_begin]];
      const double* pa = value_ptr(a);
      for (std::size_t i = 0; i < n.rows; ++i) {
        std::memcpy(out + i * n.cols, pa + i * a.cols + n.aux0,
                    n.cols * sizeof(double));
      }
      break;
    }
    case Op::kConcatCols: {
      std::size_t col_off = 0;
      for (std::uint32_t p = 0; p < n.args_count; ++p) {
        const Node& part = nodes_[args_[n.args_begin + p]];
        const double* pp = value_ptr(part);
        for (std::size_t i = 0; i < n.rows; ++i) {
          std::memcpy(out + i * n.cols + col_off, pp + i * part.cols,
                      part.cols * sizeof(double));
        }
        col_off += part.cols;
      }
      break;
    }
    case Op::kSum: {
      const Node& a = nodes_[args_[n.args_begin]];
      const double* pa = value_ptr(a);
      double acc = 0.0;
      const std::size_t an = std::size_t{a.rows} * a.cols;
      for (std::size_t i = 0; i < an; ++i) acc += pa[i];
      out[0] = acc;
      break;
    }
    case Op::kScale: {
      const double* pa = value_ptr(nodes_[args_[n.args_begin]]);
      for (std::size_t i = 0; i < count; ++i) out[i] = n.factor * pa[i];
      break;
    }
    case Op::kMse: {
      const Node& a = nodes_[args_[n.args_begin]];
      const Node& b = nodes_[args_[n.args_begin + 1]];
      const double* pa = value_ptr(a);
      const double* pb = value_ptr(b);
      const std::size_t an = std::size_t{a.rows} * a.cols;
      double acc = 0.0;
      for (std::size_t i = 0; i < an; ++i) {
        const double d = pa[i] - pb[i];
        acc += d * d;
      }
      out[0] = acc / static_cast<double>(an);
      break;
    }
  }
}

std::span<const double> Tape::value(ValueId v) const {
  const Node& n = node(v);
  return {value_ptr(n), std::size_t{n.rows} * n.cols};
}

double Tape::scalar(ValueId v) const {
  const Node& n = node(v);
  if (n.rows != 1 || n.cols != 1) {
    throw ContractError("scalar: value has shape " +
                        shape_str(n.rows, n.cols));
  }
  return value_ptr(n)[0];
}

Tensor Tape::tensor(ValueId v) const {
  const Node& n = node(v);
  auto vals = value(v);
  return Tensor(n.rows, n.cols, std::vector<double>(vals.begin(), vals.end()));
}

void Tape::backward(ValueId loss) {
  const Node& ln = node(loss);
  if (ln.rows != 1 || ln.cols != 1) {
    throw ContractError("backward: loss must be scalar, got " +
                        shape_str(ln.rows, ln.cols));
  }
  grads_.assign(values_.size(), 0.0);
  grads_[ln.offset] = 1.0;
  has_grads_ = true;

  // Single reverse sweep. Tape order is topological (operands precede
  // consumers), so each node is finalized before its own backward runs.
  for (std::uint32_t idx = loss.index + 1; idx-- > 0;) {
    const Node& n = nodes_[idx];
    const double* gout = grads_.data() + n.offset;
    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kMatmul: {
        const Node& a = nodes_[args_[n.args_begin]];
        const Node& b = nodes_[args_[n.args_begin + 1]];
        const double* pa = value_ptr(a);
        const double* pb = value_ptr(b);
        double* ga = grads_.data() + a.offset;
        double* gb = grads_.data() + b.offset;
        const std::size_t m = a.rows, k = a.cols, nn = b.cols;
        // dA = dC · Bᵀ
        for (std::size_t i = 0; i < m; ++i) {
          const double* grow = gout + i * nn;
          for (std::size_t l = 0; l < k; ++l) {
            const double* brow = pb + l * nn;
            double acc = 0.0;
            for (std::size_t j = 0; j < nn; ++j) acc += grow[j] * brow[j];
            ga[i * k + l] += acc;
          }
        }
        // dB = Aᵀ · dC
        for (std::size_t i = 0; i < m; ++i) {
          const double* arow = pa + i * k;
          const double* grow = gout + i * nn;
          for (std::size_t l = 0; l < k; ++l) {
            const double av = arow[l];
            double* gbrow = gb + l * nn;
            for (std::size_t j = 0; j < nn; ++j) gbrow[j] += av * grow[j];
          }
        }
        break;
      }
      case Op::kAdd: {
        const Node& a = nodes_[args_[n.args_begin]];
        const Node& b = nodes_[args_[n.args_begin + 1]];
        double* ga = grads_.data() + a.offset;
        double* gb = grads_.data() + b.offset;
        const std::size_t count = std::size_t{n.rows} * n.cols;
        for (std::size_t i = 0; i < count; ++i) ga[i] += gout[i];
        if (b.rows == a.rows) {
          for (std::size_t i = 0; i < count; ++i) gb[i] += gout[i];
        } else {
          for (std::size_t i = 0; i < n.rows; ++i) {
            for (std::size_t j = 0; j < n.cols; ++j) {
              gb[j] += gout[i * n.cols + j];
            }
          }
        }
        break;
      }
      case Op::kTanh: {
        const Node& a = nodes_[args_[n.args_begin]];
        double* ga = grads_.data() + a.offset;
        const double* y = value_ptr(n);
        const std::size_t count = std::size_t{n.rows} * n.cols;
        for (std::size_t i = 0; i < count; ++i) {
          ga[i] += gout[i] * (1.0 - y[i] * y[i]);
        }
        break;
      }
      case Op::kSliceCols: {
        const Node& a = nodes_[args_[n.args_begin]];
        double* ga = grads_.data() + a.offset;
        for (std::size_t i = 0; i < n.rows; ++i) {
          for (std::size_t j = 0; j < n.cols; ++j) {
            ga[i * a.cols + n.aux0 + j] += gout[i * n.cols + j];
          }
        }
        break;
      }
      case Op::kConcatCols: {
        std::size_t col_off = 0;
        for (std::uint32_t p = 0; p < n.args_count; ++p) {
          const Node& part = nodes_[args_[n.args_begin + p]];
          double* gp = grads_.data() + part.offset;
          for (std::size_t i = 0; i < n.rows; ++i) {
            for (std::size_t j = 0; j < part.cols; ++j) {
              gp[i * part.cols + j] += gout[i * n.cols + col_off + j];
            }
          }
          col_off += part.cols;
        }
        break;
      }
      case Op::kSum: {
        const Node& a = nodes_[args_[n.args_begin]];
        double* ga = grads_.data() + a.offset;
        const std::size_t an = std::size_t{a.rows} * a.cols;
        for (std::size_t i = 0; i < an; ++i) ga[i] += gout[0];
        break;
      }
      case Op::kScale: {
        const Node& a = nodes_[args_[n.args_begin]];
        double* ga = grads_.data() + a.offset;
        const std::size_t count = std::size_t{n.rows} * n.cols;
        for (std::size_t i = 0; i < count; ++i) ga[i] += n.factor * gout[i];
        break;
      }
      case Op::kMse: {
        const Node& a = nodes_[args_[n.args_begin]];
        const Node& b = nodes_[args_[n.args_begin + 1]];
        const double* pa = value_ptr(a);
        const double* pb = value_ptr(b);
        double* ga = grads_.data() + a.offset;
        double* gb = grads_.data() + b.offset;
        const std::size_t an = std::size_t{a.rows} * a.cols;
        const double w = 2.0 * gout[0] / static_cast<double>(an);
        for (std::size_t i = 0; i < an; ++i) {
          const double d = w * (pa[i] - pb[i]);
          ga[i] += d;
          gb[i] -= d;
        }
        break;
      }
    }
  }
}

std::span<const double> Tape::grad(ValueId v) const {
  if (!has_grads_) {
    throw ContractError("grad: no backward pass has been run");
  }
  const Node& n = node(v);
  return {grads_.data() + n.offset, std::size_t{n.rows} * n.cols};
}

std::vector<Tensor> Tape::gradients(ValueId loss,
                                    std::span<const ValueId> wrt) {
  backward(loss);
  std::vector<Tensor> out;
  out.reserve(wrt.size());
  for (ValueId v : wrt) {
    const Node& n = node(v);
    auto g = grad(v);
    out.emplace_back(n.rows, n.cols, std::vector<double>(g.begin(), g.end()));
  }
  return out;
}

void Tape::replay_forward() {
  for (const Node& n : nodes_) {
    if (n.op == Op::kLeaf) continue;
    double* out = value_ptr(n);
    std::fill(out, out + std::size_t{n.rows} * n.cols, 0.0);
    compute(n);
  }
}

void Tape::reset() {
  nodes_.clear();
  args_.clear();
  values_.clear();
  grads_.clear();
  has_grads_ = false;
}

}  // namespace danet
