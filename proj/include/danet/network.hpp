#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "danet/rng.hpp"
#include "danet/tape.hpp"
#include "danet/tensor.hpp"
#include "danet/topology.hpp"

namespace danet {

/// Inner-network dimensions of a DAN: n_channels inputs, two tanh hidden
/// layers, one tanh output node.
struct PhenotypeShape {
  std::size_t in = 40;  // equals the topology's n_channels
  std::size_t h1 = 15;
  std::size_t h2 = 8;

  std::size_t param_count() const {
    return in * h1 + h1 + h1 * h2 + h2 + h2 + 1;
  }
  friend bool operator==(const PhenotypeShape&, const PhenotypeShape&) =
      default;
};

/// The parameters of one DAN. A phenotype maps an n_channels-wide slice to
/// a single activation in (-1, 1).
struct Phenotype {
  Tensor w1, b1, w2, b2, w3, b3;

  static Phenotype zeros(const PhenotypeShape& shape);
  std::size_t param_count() const;
};

/// All plastic synapse parameters: one weight matrix and bias vector per
/// adjacent layer pair, plus one weight matrix per skip pair.
struct VecBank {
  std::vector<Tensor> weights;  // weights[l]: n_l × (n_{l+1}·n_channels)
  std::vector<Tensor> biases;   // biases[l]:  1 × (n_{l+1}·n_channels)
  std::vector<Tensor> skips;    // aligned with Topology::skip_pairs
};

enum class ParamSubset { kTheta, kPhi, kBoth };

struct ParamRef {
  std::string name;
  Tensor* tensor;
};

/// Leaf handles from one recorded forward pass, aligned with
/// theta_tensors() / phi_tensors() order, so gradients can be routed back
/// to the owning parameter tensors.
struct ForwardGraph {
  ValueId input;
  ValueId prediction;                   // N × output_width
  std::vector<ValueId> theta_leaves;
  std::vector<ValueId> phi_leaves;
  std::vector<ValueId> layer_outputs;   // post-DAN activations per layer
};

/// A network whose nodes are DANs and whose connections are vectorized
/// synapses. Owns both parameter sets: plastic VECs (theta) and the DAN
/// phenotype storage (phi).
class NetworkOfDANs {
 public:
  /// Zero-initialized parameters; call init_theta/init_phi to randomize.
  NetworkOfDANs(Topology topology, SharingMode mode, PhenotypeShape shape);

  /// Fan-in-scaled random initialization: weights uniform in
  /// [-1/sqrt(fan_in), +1/sqrt(fan_in)), biases zero.
  void init_theta(RngStream& rng);
  void init_phi(RngStream& rng);

  static NetworkOfDANs init(const Topology& topology, SharingMode mode,
                            PhenotypeShape shape, std::uint64_t seed);

  const Topology& topology() const { return topo_; }
  SharingMode sharing() const { return mode_; }
  const PhenotypeShape& dan_shape() const { return shape_; }
  std::size_t num_phenotypes() const { return phis_.size(); }
  const Phenotype& phenotype(std::size_t idx) const { return phis_[idx]; }

  /// Records the full forward pass for a batch of inputs (N × n_0).
  ForwardGraph build_forward(Tape& tape, const Tensor& x_batch) const;

  double predict(double x) const;
  std::vector<double> predict_batch(std::span<const double> xs) const;

  /// Parameter enumeration; theta and phi are disjoint and together cover
  /// every trainable value. Returned pointers alias network storage.
  std::vector<ParamRef> parameters(ParamSubset subset);
  std::vector<Tensor*> theta_tensors();
  std::vector<Tensor*> phi_tensors();
  std::vector<const Tensor*> theta_tensors() const;
  std::vector<const Tensor*> phi_tensors() const;
  std::size_t param_count(ParamSubset subset) const;

  std::uint64_t checksum(ParamSubset subset) const;

  void copy_theta_from(const NetworkOfDANs& other);
  void copy_phi_from(const NetworkOfDANs& other);

  /// Index into the phenotype storage for the DAN at (layer, node);
  /// layer counts from 1 (layer 0 holds input nodes).
  std::size_t phenotype_index(std::size_t layer, std::size_t node) const;

 private:
  Topology topo_;
  SharingMode mode_;
  PhenotypeShape shape_;
  VecBank theta_;
  std::vector<Phenotype> phis_;
  std::vector<std::size_t> dan_offset_;  // per-node mode: phenotype index of
                                         // each layer's first DAN
};

/// One DAN evaluated on one input slice, outside any network.
double dan_forward(const Phenotype& phi, std::span<const double> input_slice);

}  // namespace danet
