#include "danet/rng.hpp"

#include "danet/tensor.hpp"

namespace danet {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                          std::uint64_t index) {
  std::uint64_t h = fnv1a64(stream.data(), stream.size());
  h = splitmix64(h ^ splitmix64(root));
  h = splitmix64(h ^ splitmix64(index + 1));
  return h;
}

}  // namespace danet
