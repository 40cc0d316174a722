#include "danet/topology.hpp"

namespace danet {

std::string to_string(SharingMode mode) {
  switch (mode) {
    case SharingMode::kSingle:
      return "single";
    case SharingMode::kPerLayer:
      return "per-layer";
    case SharingMode::kPerNode:
      return "per-node";
  }
  return "?";
}

SharingMode sharing_mode_from_string(const std::string& s) {
  if (s == "single") return SharingMode::kSingle;
  if (s == "per-layer") return SharingMode::kPerLayer;
  if (s == "per-node") return SharingMode::kPerNode;
  throw ArgumentError("unknown sharing mode '" + s +
                      "' (expected single | per-layer | per-node)");
}

void Topology::validate() const {
  if (layer_sizes.size() < 3) {
    throw ConstructionError(
        "topology needs at least input, one hidden, and output layers; got " +
        std::to_string(layer_sizes.size()));
  }
  for (std::size_t n : layer_sizes) {
    if (n == 0) {
      throw ConstructionError("topology has an empty layer");
    }
  }
  if (n_channels == 0) {
    throw ConstructionError("n_channels must be positive");
  }
  for (const SkipPair& sp : skip_pairs) {
    if (sp.to != sp.from + 2) {
      throw ConstructionError("skip pair (" + std::to_string(sp.from) + "," +
                              std::to_string(sp.to) +
                              ") must span exactly two layers");
    }
    if (sp.to >= layer_sizes.size()) {
      throw ConstructionError("skip pair (" + std::to_string(sp.from) + "," +
                              std::to_string(sp.to) +
                              ") exceeds the output layer");
    }
  }
}

std::size_t Topology::num_dans() const {
  std::size_t n = 0;
  for (std::size_t l = 1; l < layer_sizes.size(); ++l) n += layer_sizes[l];
  return n;
}

Topology make_topology(std::vector<std::size_t> layer_sizes,
                       std::size_t n_channels, bool with_skips) {
  Topology t;
  t.layer_sizes = std::move(layer_sizes);
  t.n_channels = n_channels;
  if (with_skips && t.layer_sizes.size() >= 3) {
    for (std::size_t j = 0; j + 2 < t.layer_sizes.size(); ++j) {
      t.skip_pairs.push_back({j, j + 2});
    }
  }
  t.validate();
  return t;
}

}  // namespace danet
