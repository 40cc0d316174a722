#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace danet {

/// Deterministic uniform random stream. Draws are built directly from
/// mt19937_64 outputs so sequences are bit-identical across standard
/// libraries and platforms.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  /// Uniform in [-bound, bound).
  double symmetric(double bound) { return uniform(-bound, bound); }

 private:
  std::mt19937_64 gen_;
};

// All randomness in a run flows from one root seed through named streams
// ("task", "data", "theta-init", ...) so experiment cells can share some
// streams while varying others.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                          std::uint64_t index = 0);

inline RngStream make_stream(std::uint64_t root, std::string_view stream,
                             std::uint64_t index = 0) {
  return RngStream(derive_seed(root, stream, index));
}

}  // namespace danet
