#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gemnas {

// Seeded random source. mt19937_64 output is fully specified by the standard;
// all derived draws below are built from raw 64-bit words instead of the
// std:: distribution templates, whose streams are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Uniform in [0, bound). bound must be positive.
  std::size_t next_index(std::size_t bound) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  bool next_bernoulli(double p) { return next_unit() < p; }

  // Standard normal via Box-Muller. Two words consumed per draw.
  double next_gaussian();

 private:
  std::mt19937_64 gen_;
};

// Stable seed derivation for sub-components: hashes a tag string into the base
// seed so parallel consumers get decorrelated, reproducible streams.
std::uint64_t mix_seed(std::uint64_t base, std::string_view tag);
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt);

// FNV-1a over bytes; building block for content hashes.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 1469598103934665603ull);

}  // namespace gemnas
