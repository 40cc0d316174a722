#include "danet/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace danet {

namespace {

constexpr char kMagic[8] = {'D', 'A', 'N', 'C', 'K', 'P', 'T', '\0'};

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_string(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

std::string read_string(std::istream& in) {
  const std::uint32_t len = read_u32(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  return s;
}

}  // namespace

void save_checkpoint(const NetworkOfDANs& net, std::uint64_t root_seed,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw CheckpointError("cannot open '" + path + "' for writing");
  }
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kCheckpointVersion);

  const Topology& topo = net.topology();
  write_u32(out, static_cast<std::uint32_t>(net.sharing()));
  write_u32(out, static_cast<std::uint32_t>(topo.n_channels));
  write_u32(out, static_cast<std::uint32_t>(net.dan_shape().h1));
  write_u32(out, static_cast<std::uint32_t>(net.dan_shape().h2));
  write_u32(out, static_cast<std::uint32_t>(topo.layer_sizes.size()));
  for (std::size_t n : topo.layer_sizes) {
    write_u32(out, static_cast<std::uint32_t>(n));
  }
  write_u32(out, static_cast<std::uint32_t>(topo.skip_pairs.size()));
  for (const SkipPair& sp : topo.skip_pairs) {
    write_u32(out, static_cast<std::uint32_t>(sp.from));
    write_u32(out, static_cast<std::uint32_t>(sp.to));
  }
  write_u64(out, root_seed);

  auto params = const_cast<NetworkOfDANs&>(net).parameters(ParamSubset::kBoth);
  write_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const ParamRef& p : params) {
    write_string(out, p.name);
    write_u32(out, static_cast<std::uint32_t>(p.tensor->rows()));
    write_u32(out, static_cast<std::uint32_t>(p.tensor->cols()));
    out.write(reinterpret_cast<const char*>(p.tensor->data()),
              static_cast<std::streamsize>(p.tensor->size() *
                                           sizeof(double)));
  }
  if (!out) {
    throw CheckpointError("write to '" + path + "' failed");
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CheckpointError("cannot open '" + path + "' for reading");
  }
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("'" + path + "' is not a checkpoint file");
  }
  const std::uint32_t version = read_u32(in);
  if (version > kCheckpointVersion) {
    throw CheckpointError(
        "checkpoint version " + std::to_string(version) +
        " is newer than supported version " +
        std::to_string(kCheckpointVersion));
  }

  const auto sharing = static_cast<SharingMode>(read_u32(in));
  Topology topo;
  topo.n_channels = read_u32(in);
  PhenotypeShape shape;
  shape.in = topo.n_channels;
  shape.h1 = read_u32(in);
  shape.h2 = read_u32(in);
  const std::uint32_t n_layers = read_u32(in);
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    topo.layer_sizes.push_back(read_u32(in));
  }
  const std::uint32_t n_skips = read_u32(in);
  for (std::uint32_t i = 0; i < n_skips; ++i) {
    const std::size_t from = read_u32(in);
    const std::size_t to = read_u32(in);
    topo.skip_pairs.push_back({from, to});
  }
  const std::uint64_t root_seed = read_u64(in);

  NetworkOfDANs net(topo, sharing, shape);
  auto params = net.parameters(ParamSubset::kBoth);
  const std::uint32_t n_tensors = read_u32(in);
  if (n_tensors != params.size()) {
    throw CheckpointError("checkpoint holds " + std::to_string(n_tensors) +
                          " tensors, network expects " +
                          std::to_string(params.size()));
  }
  for (ParamRef& p : params) {
    const std::string name = read_string(in);
    if (name != p.name) {
      throw CheckpointError("unexpected tensor '" + name + "', expected '" +
                            p.name + "'");
    }
    const std::uint32_t rows = read_u32(in);
    const std::uint32_t cols = read_u32(in);
    if (rows != p.tensor->rows() || cols != p.tensor->cols()) {
      throw CheckpointError("tensor '" + name + "' has shape " +
                            shape_str(rows, cols) + ", expected " +
                            p.tensor->shape_str());
    }
    in.read(reinterpret_cast<char*>(p.tensor->data()),
            static_cast<std::streamsize>(p.tensor->size() * sizeof(double)));
  }
  if (!in) {
    throw CheckpointError("'" + path + "' is truncated");
  }
  return Checkpoint{std::move(net), root_seed};
}

}  // namespace danet
