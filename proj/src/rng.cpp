#include "gemnas/rng.hpp"

#include <cmath>
#include <numbers>

namespace gemnas {

double Rng::next_gaussian() {
  // u1 in (0, 1] so the log stays finite.
  double u1 = 1.0 - next_unit();
  double u2 = next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

// splitmix64 finalizer; decorrelates nearby seeds.
std::uint64_t avalanche(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t base, std::string_view tag) {
  return avalanche(base ^ fnv1a64(tag));
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  return avalanche(base ^ avalanche(salt));
}

}  // namespace gemnas
