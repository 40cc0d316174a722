#pragma once

#include <cstdint>
#include <string>

#include "danet/network.hpp"

namespace danet {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Everything needed to reconstruct a network bit-for-bit: topology,
/// sharing mode, phenotype dimensions, the root seed the run was derived
/// from, and every parameter tensor.
struct Checkpoint {
  NetworkOfDANs network;
  std::uint64_t root_seed = 0;
};

/// Binary container, little-endian, versioned. Loading a file and saving
/// it again reproduces the original bytes exactly.
void save_checkpoint(const NetworkOfDANs& net, std::uint64_t root_seed,
                     const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace danet
