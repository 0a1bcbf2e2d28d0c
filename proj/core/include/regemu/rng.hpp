#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace regemu {

// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

using Rng = std::mt19937_64;

/// Derives named, independent RNG streams from a single master seed.
/// The same (domain, index) pair always yields the same stream, so adding
/// a new stream never perturbs existing ones.
class RngFactory {
 public:
  explicit RngFactory(std::uint64_t master_seed) : master_(master_seed) {}

  Rng stream(std::uint64_t domain, std::uint64_t index = 0) const {
    const std::uint64_t mixed =
        splitmix64(master_ ^ splitmix64(domain + 0x100 * (index + 1)));
    return Rng(mixed);
  }

  Rng stream(std::string_view name, std::uint64_t index = 0) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : name) {
      h ^= static_cast<std::uint8_t>(c);
      h *= 0x100000001b3ULL;
    }
    return stream(h, index);
  }

  std::uint64_t master() const { return master_; }

 private:
  std::uint64_t master_;
};

}  // namespace regemu
