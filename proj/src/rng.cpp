#include "cqpbb/rng.hpp"

#include <cmath>

namespace cqpbb {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Rng::Rng(std::uint64_t seed, std::string_view tag) : eng_(splitmix64(seed ^ fnv1a(tag))) {}

double Rng::uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

int Rng::index(int n) {
  const int k = static_cast<int>(uniform() * n);
  return k < n ? k : n - 1;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double rad = std::sqrt(-2.0 * std::log(u1));
  spare_ = rad * std::sin(kTwoPi * u2);
  has_spare_ = true;
  return rad * std::cos(kTwoPi * u2);
}

Complex Rng::complex_normal() {
  const double s = std::sqrt(0.5);
  const double re = normal();
  const double im = normal();
  return {s * re, s * im};
}

}  // namespace cqpbb
