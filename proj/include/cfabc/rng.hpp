#pragma once

#include <cstdint>

namespace cfabc {

/// Deterministic 64-bit RNG (splitmix64). Standard-library distributions are
/// implementation-defined, so all draws go through this to keep runs
/// byte-identical across platforms and worker counts.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // 128-bit multiply rejection-free bounded draw (Lemire); bias < 2^-64.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Standard normal via Box-Muller (deterministic, two draws per call).
  double normal();

 private:
  std::uint64_t state_;
};

/// Mixes a root seed with a stream tag and an item index into an independent
/// sub-stream seed. Per-item derivation keeps results independent of how
/// work is partitioned across workers.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream,
                          std::uint64_t index = 0);

}  // namespace cfabc
