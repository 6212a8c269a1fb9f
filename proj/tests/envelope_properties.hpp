#pragma once

// Sampling checks of the envelope module, shared by the unit tests and the
// acceptance run.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "cqpbb/bb.hpp"
#include "cqpbb/envelope.hpp"

namespace testing {

struct PropertyTally {
  long samples = 0;
  long failures = 0;
  std::string first_failure;

  void record(bool ok, const std::string& what) {
    ++samples;
    if (!ok && failures++ == 0) first_failure = what;
  }
};

inline std::vector<cqpbb::ArgumentSet> property_argument_sets() {
  using cqpbb::ArgumentSet;
  using cqpbb::kPi;
  return {ArgumentSet::interval(0.0, kPi / 2),    ArgumentSet::interval(-kPi / 6, kPi / 6),
          ArgumentSet::interval(1.0, 1.0 + kPi),  ArgumentSet::interval(5.5, 5.5 + 0.01),
          ArgumentSet::interval(2.0, 2.0 + 4.0),  ArgumentSet::full_circle(),
          ArgumentSet::psk(2),                    ArgumentSet::psk(4),
          ArgumentSet::psk(8),                    ArgumentSet::discrete({0.3, 1.2, 2.0}),
          ArgumentSet::discrete({0.1, 4.0}),      ArgumentSet::discrete({0.5, 0.6, 5.9}),
          ArgumentSet::singleton(2.5)};
}

// A point of the set, uniformly over the arc or the symbols.
inline double sample_angle(const cqpbb::ArgumentSet& a, std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (a.is_interval()) return a.lo + (a.hi - a.lo) * u(g);
  return a.angles[static_cast<std::size_t>(u(g) * a.angles.size()) % a.angles.size()];
}

// Soundness: generator points (r e^{i theta}, r) pass at tol 1e-10, and so do
// random convex combinations of them (the envelope is convex). Convex
// combinations also obey the modulus ratio bound when the width is at most pi.
inline void check_argument_envelopes(std::mt19937_64& g, int samples_per_set, PropertyTally& t) {
  using namespace cqpbb;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& a : property_argument_sets()) {
    const auto env = build_argument_envelope(a);
    const double w = width_argument(a);
    const double ratio = tightness_bounds(a, {0.0, 1.0}).modulus_ratio;
    for (int s = 0; s < samples_per_set; ++s) {
      const double r = 3.0 * u(g);
      const double th = sample_angle(a, g);
      t.record(argument_membership(env, std::polar(r, th), r, 1e-10), "generator point rejected");

      const int k = 2 + s % 4;
      Complex x = 0.0;
      double rr = 0.0, wsum = 0.0;
      std::vector<double> lam(k);
      for (auto& l : lam) wsum += (l = u(g));
      for (int j = 0; j < k; ++j) {
        const double rj = 3.0 * u(g);
        x += lam[j] / wsum * std::polar(rj, sample_angle(a, g));
        rr += lam[j] / wsum * rj;
      }
      t.record(argument_membership(env, x, rr, 1e-10), "convex combination rejected");
      if (w <= kPi) t.record(std::abs(x) >= rr * ratio - 1e-10, "modulus ratio bound violated");
    }
  }
}

inline void check_modulus_envelopes(std::mt19937_64& g, int samples_per_set, PropertyTally& t) {
  using namespace cqpbb;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<ModulusBounds> sets = {{0.2, 1.0}, {0.0, 1.0}, {1.0, 1.0}, {0.5, 3.0}, {0.0, 0.0}};
  for (const auto& b : sets) {
    const auto env = build_modulus_envelope(b);
    const double gap = tightness_bounds(ArgumentSet::full_circle(), b).square_gap;
    for (int s = 0; s < samples_per_set; ++s) {
      const double r = b.lo + (b.hi - b.lo) * u(g);
      t.record(modulus_membership(env, r * r, r, 1e-10), "(r^2, r) rejected");
      // Random member: X between r^2 and the chord.
      const double top = (b.lo + b.hi) * r - b.lo * b.hi;
      const double X = r * r + (top - r * r) * u(g);
      t.record(modulus_membership(env, X, r, 1e-10), "chord region rejected");
      t.record(X - r * r >= -1e-10 && X - r * r <= gap + 1e-10, "square gap bound violated");
    }
  }
}

// If (x, r) is a member with |x| = r > 0, arg x lies in the set.
inline void check_recovery(std::mt19937_64& g, int samples_per_set, PropertyTally& t) {
  using namespace cqpbb;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& a : property_argument_sets()) {
    if (a.is_interval() && width_argument(a) > kPi) continue;
    const auto env = build_argument_envelope(a);
    for (int s = 0; s < samples_per_set; ++s) {
      // Half of the probes land within 0.05 rad of an admissible angle.
      const double th = (s % 2 == 0) ? sample_angle(a, g) + 0.1 * (u(g) - 0.5) : kTwoPi * u(g);
      const double r = 0.1 + 2.0 * u(g);
      if (argument_membership(env, std::polar(r, th), r, 1e-9))
        t.record(a.distance(th) < 1e-6, "member on the circle outside the set");
      else
        ++t.samples;
    }
  }
}

// Envelopes of the children produced by branch() lie inside the parent's.
inline void check_partition_monotonicity(std::mt19937_64& g, int samples_per_set, PropertyTally& t) {
  using namespace cqpbb;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& a : property_argument_sets()) {
    if (a.is_singleton()) continue;
    SearchBox box{{a}, {ModulusBounds{0.0, 1.0}}};
    const auto [left, right] = branch(box, BranchScore{0, 1.0, 0, 0.0});
    const auto parent = build_argument_envelope(a);
    for (const auto* child : {&left, &right}) {
      const auto env = build_argument_envelope(child->args[0]);
      int accepted = 0;
      for (int s = 0; s < 20 * samples_per_set && accepted < samples_per_set; ++s) {
        const double r = u(g);
        const Complex x = std::polar(r * std::sqrt(u(g)), kTwoPi * u(g));
        if (!argument_membership(env, x, r, 0.0)) continue;
        ++accepted;
        t.record(argument_membership(parent, x, r, 1e-10), "child member outside the parent envelope");
      }
      // Generator points of the child are always available as members.
      for (int s = 0; s < samples_per_set; ++s) {
        const double r = u(g);
        t.record(argument_membership(parent, std::polar(r, sample_angle(child->args[0], g)), r, 1e-10),
                 "child generator outside the parent envelope");
      }
    }
  }
}

}  // namespace testing
