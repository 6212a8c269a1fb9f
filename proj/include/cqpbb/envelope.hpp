#pragma once

#include <vector>

#include "cqpbb/model.hpp"

namespace cqpbb {

enum class CutSense { GreaterEqual, LessEqual, Equal };

/// alpha*Re(x) + beta*Im(x)  {sense}  gamma*r
struct HalfspaceCut {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  CutSense sense = CutSense::LessEqual;

  double slack(Complex x, double r) const { return alpha * x.real() + beta * x.imag() - gamma * r; }
};

/// Convex envelope of {(x, r) : x = r e^{i theta}, theta in A, r >= 0}.
struct ArgumentEnvelope {
  std::vector<HalfspaceCut> cuts;
  bool include_disk = true;  // |x| <= r
};

/// Convex envelope of {(X, r) : X = r^2, lo <= r <= hi}:
/// X >= r^2 and X - (lo + hi) r + lo hi <= 0.
struct ModulusEnvelope {
  double lo = 0.0;
  double hi = 0.0;
};

inline constexpr double kMembershipTol = 1e-8;

ArgumentEnvelope build_argument_envelope(const ArgumentSet& a);
bool argument_membership(const ArgumentEnvelope& e, Complex x, double r, double tol = kMembershipTol);

ModulusEnvelope build_modulus_envelope(const ModulusBounds& b);
bool modulus_membership(const ModulusEnvelope& e, double X, double r, double tol = kMembershipTol);

double width_argument(const ArgumentSet& a);
double width_modulus(const ModulusBounds& b);

struct TightnessBounds {
  double modulus_ratio = 0.0;  // envelope members satisfy |x| >= ratio * r
  double square_gap = 0.0;     // envelope members satisfy X - r^2 <= gap
};

TightnessBounds tightness_bounds(const ArgumentSet& a, const ModulusBounds& b);

}  // namespace cqpbb
