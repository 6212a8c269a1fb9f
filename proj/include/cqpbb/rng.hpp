#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "cqpbb/model.hpp"

namespace cqpbb {

std::uint64_t splitmix64(std::uint64_t x);

/// 64-bit FNV-1a hash.
std::uint64_t fnv1a(std::string_view s);

/// Portable random stream: mt19937_64 seeded with splitmix64(seed ^ fnv1a(tag)),
/// so each named tensor of an instance draws from its own substream. Every
/// distribution is computed here rather than by <random> so that streams are
/// identical across standard libraries.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view tag);

  std::uint64_t next_u64() { return eng_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  /// Uniform on {0, ..., n - 1}.
  int index(int n);
  /// Standard normal by the Box-Muller transform.
  double normal();
  /// Standard complex Gaussian: real and imaginary parts N(0, 1/2).
  Complex complex_normal();

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cqpbb
