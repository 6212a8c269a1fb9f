#pragma once

#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cqpbb {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
// Dense complex storage; Hermitian symmetry is checked by validate(), not enforced.
using HermitianMatrix = Eigen::MatrixXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Maps any angle to [0, 2pi).
double normalize_angle(double theta);

/// min{|a - b|, 2pi - |a - b|} after reduction modulo 2pi.
double circular_distance(double a, double b);

enum class ArgumentKind { Interval, Discrete };

/// Admissible arguments of one coordinate.
///
/// Intervals are stored with `lo` in [0, 2pi) and `hi = lo + width`, so `hi`
/// may exceed 2pi when the arc wraps past zero. Discrete sets are sorted,
/// strictly increasing angles in [0, 2pi). Use the factories; validate()
/// reports hand-built sets that break these rules.
struct ArgumentSet {
  ArgumentKind kind = ArgumentKind::Interval;
  double lo = 0.0;
  double hi = kTwoPi;
  std::vector<double> angles;

  static ArgumentSet interval(double lo, double hi);
  static ArgumentSet full_circle();
  static ArgumentSet discrete(std::vector<double> angles);
  static ArgumentSet psk(int order);
  static ArgumentSet singleton(double theta);

  bool is_interval() const { return kind == ArgumentKind::Interval; }
  bool is_discrete() const { return kind == ArgumentKind::Discrete; }
  /// Discrete with one element, or an interval of zero width.
  bool is_singleton() const;
  double min_angle() const;
  double max_angle() const;
  /// Circular distance from theta to the nearest admissible angle.
  double distance(double theta) const;
  bool contains(double theta, double tol = 1e-12) const;

  friend bool operator==(const ArgumentSet&, const ArgumentSet&) = default;
};

struct ModulusBounds {
  double lo = 0.0;
  double hi = 1.0;

  bool is_fixed() const { return lo == hi; }
  friend bool operator==(const ModulusBounds&, const ModulusBounds&) = default;
};

/// min 1/2 x^H Q x + Re(c^H x)  s.t.  lo_i <= |x_i| <= hi_i,  arg(x_i) in A_i.
struct ProblemCQP {
  int n = 0;
  HermitianMatrix Q;
  ComplexVector c;
  std::vector<ModulusBounds> bounds;
  std::vector<ArgumentSet> args;

  friend bool operator==(const ProblemCQP&, const ProblemCQP&) = default;
};

/// Constants of the worst-case analysis of the branch-and-bound method.
struct ComplexityConstants {
  double u_max = 0.0;
  double m_f = 0.0;  // Lipschitz constant of F over {|x_i| <= u_max}
  double m1 = 0.0;
  double m2 = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
};

/// F(x) = 1/2 x^H Q x + Re(c^H x). Throws std::invalid_argument on size mismatch.
double evaluate_objective(const ProblemCQP& p, const ComplexVector& x);

/// Every violated invariant, as a human-readable message. Empty means valid.
std::vector<std::string> validate(const ProblemCQP& p);

/// Throws std::invalid_argument if validate() reports anything.
void require_valid(const ProblemCQP& p);

ComplexityConstants compute_constants(const ProblemCQP& p, double epsilon);

/// Whether x satisfies the modulus and argument constraints within tol.
bool is_feasible(const ProblemCQP& p, const ComplexVector& x, double tol = 1e-9);

}  // namespace cqpbb
