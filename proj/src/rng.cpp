#include "cfabc/rng.hpp"

#include <cmath>
#include <numbers>

namespace cfabc {

double Rng::normal() {
  double u1 = uniform();
  double u2 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream,
                          std::uint64_t index) {
  Rng mixer(root ^ (stream * 0xd1b54a32d192ed03ull) ^
            (index * 0x2545f4914f6cdd1dull));
  return mixer.next_u64();
}

}  // namespace cfabc
