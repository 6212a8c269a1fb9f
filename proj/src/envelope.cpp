#include "cqpbb/envelope.hpp"

#include <cmath>

namespace cqpbb {
namespace {

// Chord through e^{i a} and e^{i b} (b reached counter-clockwise from a):
// the hull side satisfies <x, e^{i(a+b)/2}> <= cos((b-a)/2) r.
HalfspaceCut chord(double a, double b) {
  const double mid = 0.5 * (a + b);
  return {std::cos(mid), std::sin(mid), std::cos(0.5 * (b - a)), CutSense::LessEqual};
}

}  // namespace

ArgumentEnvelope build_argument_envelope(const ArgumentSet& a) {
  ArgumentEnvelope e;
  if (a.is_singleton()) {
    const double t = a.min_angle();
    e.include_disk = false;
    e.cuts.push_back({1.0, 0.0, std::cos(t), CutSense::Equal});
    e.cuts.push_back({0.0, 1.0, std::sin(t), CutSense::Equal});
    return e;
  }
  if (a.is_interval()) {
    const double w = a.hi - a.lo;
    if (w <= kPi) {
      const double mid = 0.5 * (a.lo + a.hi);
      e.cuts.push_back({std::cos(mid), std::sin(mid), std::cos(0.5 * w), CutSense::GreaterEqual});
    }
    return e;
  }

  // Polygonal cone spanned by the constellation rays: one facet per pair of
  // angularly consecutive points, including the wrap-around pair.
  const auto& t = a.angles;
  const std::size_t k = t.size();
  if (k == 2) {
    // Both facets lie on the same line; a single equality keeps the
    // relaxation strictly feasible, and the disk closes the segment.
    HalfspaceCut c = chord(t[0], t[1]);
    c.sense = CutSense::Equal;
    e.cuts.push_back(c);
    return e;
  }
  for (std::size_t j = 0; j < k; ++j) {
    const double from = t[j];
    const double to = (j + 1 < k) ? t[j + 1] : t[0] + kTwoPi;
    e.cuts.push_back(chord(from, to));
  }
  return e;
}

bool argument_membership(const ArgumentEnvelope& e, Complex x, double r, double tol) {
  for (const auto& c : e.cuts) {
    const double s = c.slack(x, r);
    switch (c.sense) {
      case CutSense::GreaterEqual:
        if (s < -tol) return false;
        break;
      case CutSense::LessEqual:
        if (s > tol) return false;
        break;
      case CutSense::Equal:
        if (std::abs(s) > tol) return false;
        break;
    }
  }
  if (e.include_disk && std::abs(x) > r + tol) return false;
  return true;
}

ModulusEnvelope build_modulus_envelope(const ModulusBounds& b) { return {b.lo, b.hi}; }

bool modulus_membership(const ModulusEnvelope& e, double X, double r, double tol) {
  return X >= r * r - tol && X - (e.lo + e.hi) * r + e.lo * e.hi <= tol;
}

double width_argument(const ArgumentSet& a) { return a.max_angle() - a.min_angle(); }

double width_modulus(const ModulusBounds& b) { return b.hi - b.lo; }

TightnessBounds tightness_bounds(const ArgumentSet& a, const ModulusBounds& b) {
  const double wa = width_argument(a);
  const double wb = width_modulus(b);
  return {wa <= kPi ? std::cos(0.5 * wa) : 0.0, 0.25 * wb * wb};
}

}  // namespace cqpbb
