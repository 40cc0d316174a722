#include "danet/tensor.hpp"

#include <cmath>
#include <utility>

namespace danet {

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows_ * cols_ != data_.size()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + danet::shape_str(rows, cols));
  }
}

Tensor Tensor::row(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor(1, n, std::move(values));
}

std::string Tensor::shape_str() const { return danet::shape_str(rows_, cols_); }

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string shape_str(std::size_t rows, std::size_t cols) {
  return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
}

std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t state) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    state ^= bytes[i];
    state *= 0x100000001b3ull;
  }
  return state;
}

std::uint64_t checksum_tensors(std::span<const Tensor* const> tensors) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const Tensor* t : tensors) {
    const std::uint64_t dims[2] = {t->rows(), t->cols()};
    h = fnv1a64(dims, sizeof(dims), h);
    h = fnv1a64(t->data(), t->size() * sizeof(double), h);
  }
  return h;
}

}  // namespace danet
