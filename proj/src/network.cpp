#include "danet/network.hpp"

#include <cmath>

namespace danet {

namespace {

void fill_fan_in_uniform(Tensor& w, std::size_t fan_in, RngStream& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& v : w.values()) v = rng.symmetric(bound);
}

struct PhenotypeLeaves {
  ValueId w1, b1, w2, b2, w3, b3;
};

ValueId apply_dan(Tape& tape, const PhenotypeLeaves& p, ValueId slice) {
  ValueId h1 = tape.tanh(tape.add(tape.matmul(slice, p.w1), p.b1));
  ValueId h2 = tape.tanh(tape.add(tape.matmul(h1, p.w2), p.b2));
  return tape.tanh(tape.add(tape.matmul(h2, p.w3), p.b3));
}

}  // namespace

Phenotype Phenotype::zeros(const PhenotypeShape& s) {
  Phenotype p;
  p.w1 = Tensor(s.in, s.h1);
  p.b1 = Tensor(1, s.h1);
  p.w2 = Tensor(s.h1, s.h2);
  p.b2 = Tensor(1, s.h2);
  p.w3 = Tensor(s.h2, 1);
  p.b3 = Tensor(1, 1);
  return p;
}

std::size_t Phenotype::param_count() const {
  return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size();
}

NetworkOfDANs::NetworkOfDANs(Topology topology, SharingMode mode,
                             PhenotypeShape shape)
    : topo_(std::move(topology)), mode_(mode), shape_(shape) {
  topo_.validate();
  if (shape_.in != topo_.n_channels) {
    throw ConstructionError(
        "phenotype input width " + std::to_string(shape_.in) +
        " must equal n_channels " + std::to_string(topo_.n_channels));
  }

  const std::size_t C = topo_.n_channels;
  for (std::size_t l = 0; l + 1 < topo_.num_layers(); ++l) {
    const std::size_t rows = topo_.layer_sizes[l];
    const std::size_t cols = topo_.layer_sizes[l + 1] * C;
    theta_.weights.emplace_back(rows, cols);
    theta_.biases.emplace_back(1, cols);
  }
  for (const SkipPair& sp : topo_.skip_pairs) {
    theta_.skips.emplace_back(topo_.layer_sizes[sp.from],
                              topo_.layer_sizes[sp.to] * C);
  }

  std::size_t n_phis = 1;
  if (mode_ == SharingMode::kPerLayer) {
    n_phis = topo_.num_vec_layers();
  } else if (mode_ == SharingMode::kPerNode) {
    n_phis = topo_.num_dans();
  }
  phis_.assign(n_phis, Phenotype::zeros(shape_));

  dan_offset_.assign(topo_.num_vec_layers(), 0);
  std::size_t acc = 0;
  for (std::size_t l = 1; l < topo_.num_layers(); ++l) {
    dan_offset_[l - 1] = acc;
    acc += topo_.layer_sizes[l];
  }
}

void NetworkOfDANs::init_theta(RngStream& rng) {
  for (std::size_t l = 0; l < theta_.weights.size(); ++l) {
    fill_fan_in_uniform(theta_.weights[l], topo_.layer_sizes[l], rng);
    theta_.biases[l].fill(0.0);
  }
  for (std::size_t s = 0; s < theta_.skips.size(); ++s) {
    fill_fan_in_uniform(theta_.skips[s],
                        topo_.layer_sizes[topo_.skip_pairs[s].from], rng);
  }
}

void NetworkOfDANs::init_phi(RngStream& rng) {
  for (Phenotype& p : phis_) {
    fill_fan_in_uniform(p.w1, shape_.in, rng);
    fill_fan_in_uniform(p.w2, shape_.h1, rng);
    fill_fan_in_uniform(p.w3, shape_.h2, rng);
    p.b1.fill(0.0);
    p.b2.fill(0.0);
    p.b3.fill(0.0);
  }
}

NetworkOfDANs NetworkOfDANs::init(const Topology& topology, SharingMode mode,
                                  PhenotypeShape shape, std::uint64_t seed) {
  NetworkOfDANs net(topology, mode, shape);
  RngStream theta_rng = make_stream(seed, "theta-init");
  RngStream phi_rng = make_stream(seed, "phi-init");
  net.init_theta(theta_rng);
  net.init_phi(phi_rng);
  return net;
}

std::size_t NetworkOfDANs::phenotype_index(std::size_t layer,
                                           std::size_t node) const {
  switch (mode_) {
    case SharingMode::kSingle:
      return 0;
    case SharingMode::kPerLayer:
      return layer - 1;
    case SharingMode::kPerNode:
      return dan_offset_[layer - 1] + node;
  }
  return 0;
}

ForwardGraph NetworkOfDANs::build_forward(Tape& tape,
                                          const Tensor& x_batch) const {
  if (x_batch.cols() != topo_.layer_sizes[0]) {
    throw ShapeError("forward: input width " + x_batch.shape_str() +
                     " does not match " +
                     std::to_string(topo_.layer_sizes[0]) + " input nodes");
  }

  ForwardGraph g;
  std::vector<ValueId> w_leaf, b_leaf, s_leaf;
  for (std::size_t l = 0; l < theta_.weights.size(); ++l) {
    w_leaf.push_back(tape.leaf(theta_.weights[l]));
    b_leaf.push_back(tape.leaf(theta_.biases[l]));
    g.theta_leaves.push_back(w_leaf.back());
    g.theta_leaves.push_back(b_leaf.back());
  }
  for (const Tensor& skip : theta_.skips) {
    s_leaf.push_back(tape.leaf(skip));
    g.theta_leaves.push_back(s_leaf.back());
  }
  std::vector<PhenotypeLeaves> phi_leaves;
  for (const Phenotype& p : phis_) {
    PhenotypeLeaves pl{tape.leaf(p.w1), tape.leaf(p.b1), tape.leaf(p.w2),
                       tape.leaf(p.b2), tape.leaf(p.w3), tape.leaf(p.b3)};
    phi_leaves.push_back(pl);
    for (ValueId v : {pl.w1, pl.b1, pl.w2, pl.b2, pl.w3, pl.b3}) {
      g.phi_leaves.push_back(v);
    }
  }

  g.input = tape.leaf(x_batch);
  std::vector<ValueId> sigma(topo_.num_layers());
  sigma[0] = g.input;

  const std::size_t C = topo_.n_channels;
  for (std::size_t l = 0; l + 1 < topo_.num_layers(); ++l) {
    // Raw dot product plus bias; no nonlinearity before slicing.
    ValueId pre = tape.add(tape.matmul(sigma[l], w_leaf[l]), b_leaf[l]);
    for (std::size_t s = 0; s < topo_.skip_pairs.size(); ++s) {
      if (topo_.skip_pairs[s].to == l + 1) {
        pre = tape.add(
            pre, tape.matmul(sigma[topo_.skip_pairs[s].from], s_leaf[s]));
      }
    }
    const std::size_t n_next = topo_.layer_sizes[l + 1];
    std::vector<ValueId> outs(n_next);
    for (std::size_t i = 0; i < n_next; ++i) {
      ValueId slice = tape.slice_cols(pre, i * C, C);
      outs[i] = apply_dan(tape, phi_leaves[phenotype_index(l + 1, i)], slice);
    }
    sigma[l + 1] = tape.concat_cols(outs);
    g.layer_outputs.push_back(sigma[l + 1]);
  }

  g.prediction = sigma[topo_.num_layers() - 1];
  return g;
}

double NetworkOfDANs::predict(double x) const {
  if (topo_.layer_sizes[0] != 1) {
    throw ContractError("predict(double) needs a single input node");
  }
  Tape tape;
  ForwardGraph g = build_forward(tape, Tensor(1, 1, {x}));
  return tape.value(g.prediction)[0];
}

std::vector<double> NetworkOfDANs::predict_batch(
    std::span<const double> xs) const {
  if (topo_.layer_sizes[0] != 1) {
    throw ContractError("predict_batch needs a single input node");
  }
  Tape tape;
  Tensor x(xs.size(), 1, std::vector<double>(xs.begin(), xs.end()));
  ForwardGraph g = build_forward(tape, x);
  auto pred = tape.value(g.prediction);
  return std::vector<double>(pred.begin(), pred.end());
}

std::vector<Tensor*> NetworkOfDANs::theta_tensors() {
  std::vector<Tensor*> out;
  for (std::size_t l = 0; l < theta_.weights.size(); ++l) {
    out.push_back(&theta_.weights[l]);
    out.push_back(&theta_.biases[l]);
  }
  for (Tensor& skip : theta_.skips) out.push_back(&skip);
  return out;
}

std::vector<Tensor*> NetworkOfDANs::phi_tensors() {
  std::vector<Tensor*> out;
  for (Phenotype& p : phis_) {
    for (Tensor* t : {&p.w1, &p.b1, &p.w2, &p.b2, &p.w3, &p.b3}) {
      out.push_back(t);
    }
  }
  return out;
}

std::vector<const Tensor*> NetworkOfDANs::theta_tensors() const {
  auto mut = const_cast<NetworkOfDANs*>(this)->theta_tensors();
  return {mut.begin(), mut.end()};
}

std::vector<const Tensor*> NetworkOfDANs::phi_tensors() const {
  auto mut = const_cast<NetworkOfDANs*>(this)->phi_tensors();
  return {mut.begin(), mut.end()};
}

std::vector<ParamRef> NetworkOfDANs::parameters(ParamSubset subset) {
  std::vector<ParamRef> out;
  if (subset == ParamSubset::kTheta || subset == ParamSubset::kBoth) {
    for (std::size_t l = 0; l < theta_.weights.size(); ++l) {
      out.push_back({"theta.l" + std::to_string(l) + ".w",
                     &theta_.weights[l]});
      out.push_back({"theta.l" + std::to_string(l) + ".b",
                     &theta_.biases[l]});
    }
    for (std::size_t s = 0; s < theta_.skips.size(); ++s) {
      const SkipPair& sp = topo_.skip_pairs[s];
      out.push_back({"theta.skip" + std::to_string(sp.from) + "-" +
                         std::to_string(sp.to) + ".w",
                     &theta_.skips[s]});
    }
  }
  if (subset == ParamSubset::kPhi || subset == ParamSubset::kBoth) {
    for (std::size_t p = 0; p < phis_.size(); ++p) {
      const std::string base = "phi" + std::to_string(p) + ".";
      out.push_back({base + "w1", &phis_[p].w1});
      out.push_back({base + "b1", &phis_[p].b1});
      out.push_back({base + "w2", &phis_[p].w2});
      out.push_back({base + "b2", &phis_[p].b2});
      out.push_back({base + "w3", &phis_[p].w3});
      out.push_back({base + "b3", &phis_[p].b3});
    }
  }
  return out;
}

std::size_t NetworkOfDANs::param_count(ParamSubset subset) const {
  std::size_t n = 0;
  if (subset == ParamSubset::kTheta || subset == ParamSubset::kBoth) {
    for (const Tensor* t : theta_tensors()) n += t->size();
  }
  if (subset == ParamSubset::kPhi || subset == ParamSubset::kBoth) {
    for (const Tensor* t : phi_tensors()) n += t->size();
  }
  return n;
}

std::uint64_t NetworkOfDANs::checksum(ParamSubset subset) const {
  std::vector<const Tensor*> ts;
  if (subset == ParamSubset::kTheta || subset == ParamSubset::kBoth) {
    auto t = theta_tensors();
    ts.insert(ts.end(), t.begin(), t.end());
  }
  if (subset == ParamSubset::kPhi || subset == ParamSubset::kBoth) {
    auto t = phi_tensors();
    ts.insert(ts.end(), t.begin(), t.end());
  }
  return checksum_tensors(ts);
}

void NetworkOfDANs::copy_theta_from(const NetworkOfDANs& other) {
  auto dst = theta_tensors();
  auto src = other.theta_tensors();
  if (dst.size() != src.size()) {
    throw ConstructionError("copy_theta_from: VEC layouts disagree");
  }
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (!dst[i]->same_shape(*src[i])) {
      throw ShapeError("copy_theta_from: shape " + src[i]->shape_str() +
                       " vs " + dst[i]->shape_str());
    }
    *dst[i] = *src[i];
  }
}

void NetworkOfDANs::copy_phi_from(const NetworkOfDANs& other) {
  if (mode_ != other.mode_ || !(shape_ == other.shape_)) {
    throw ConstructionError("copy_phi_from: phenotype layouts disagree");
  }
  auto dst = phi_tensors();
  auto src = other.phi_tensors();
  if (dst.size() != src.size()) {
    throw ConstructionError("copy_phi_from: phenotype counts disagree");
  }
  for (std::size_t i = 0; i < dst.size(); ++i) *dst[i] = *src[i];
}

double dan_forward(const Phenotype& phi, std::span<const double> input_slice) {
  if (input_slice.size() != phi.w1.rows()) {
    throw ShapeError("dan_forward: slice width " +
                     std::to_string(input_slice.size()) +
                     " does not match phenotype input " +
                     std::to_string(phi.w1.rows()));
  }
  Tape tape;
  PhenotypeLeaves p{tape.leaf(phi.w1), tape.leaf(phi.b1), tape.leaf(phi.w2),
                    tape.leaf(phi.b2), tape.leaf(phi.w3), tape.leaf(phi.b3)};
  ValueId slice = tape.leaf(input_slice, 1, input_slice.size());
  return tape.value(apply_dan(tape, p, slice))[0];
}

}  // namespace danet
