#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "danet/errors.hpp"

namespace danet {

/// How DAN parameters are shared across the network.
enum class SharingMode {
  kSingle,    // one phenotype for every DAN
  kPerLayer,  // one phenotype per DAN layer
  kPerNode,   // no sharing; every DAN owns its parameters
};

std::string to_string(SharingMode mode);
SharingMode sharing_mode_from_string(const std::string& s);

/// Skip connection routing layer `from`'s output directly into layer
/// `to`'s pre-slice input sum; `to` is always `from + 2`.
struct SkipPair {
  std::size_t from = 0;
  std::size_t to = 0;
  friend bool operator==(const SkipPair&, const SkipPair&) = default;
};

/// Outer-network layout. Layer 0 holds plain input nodes, which are not
/// DANs; every node in layers 1.. is a DAN.
struct Topology {
  std::vector<std::size_t> layer_sizes;
  std::size_t n_channels = 40;
  std::vector<SkipPair> skip_pairs;

  void validate() const;

  std::size_t num_layers() const { return layer_sizes.size(); }
  /// Number of VEC layers (= number of DAN layers).
  std::size_t num_vec_layers() const { return layer_sizes.size() - 1; }
  std::size_t num_dans() const;
  std::size_t output_width() const { return layer_sizes.back(); }

  friend bool operator==(const Topology&, const Topology&) = default;
};

/// Topology with a skip connection over every (j, j+2) layer pair.
Topology make_topology(std::vector<std::size_t> layer_sizes,
                       std::size_t n_channels, bool with_skips = true);

}  // namespace danet
