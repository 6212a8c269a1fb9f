#include "cqpbb/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cqpbb {

double normalize_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  // fmod can return exactly 2pi after the correction for tiny negatives.
  if (t >= kTwoPi) t -= kTwoPi;
  return t;
}

double circular_distance(double a, double b) {
  const double d = normalize_angle(a - b);
  return std::min(d, kTwoPi - d);
}

ArgumentSet ArgumentSet::interval(double lo, double hi) {
  if (!(hi >= lo)) throw std::invalid_argument("argument interval with hi < lo");
  const double width = hi - lo;
  if (width > kTwoPi + 1e-12) throw std::invalid_argument("argument interval wider than 2pi");
  ArgumentSet a;
  a.kind = ArgumentKind::Interval;
  a.lo = normalize_angle(lo);
  a.hi = a.lo + std::min(width, kTwoPi);
  return a;
}

ArgumentSet ArgumentSet::full_circle() { return interval(0.0, kTwoPi); }

ArgumentSet ArgumentSet::discrete(std::vector<double> angles) {
  if (angles.empty()) throw std::invalid_argument("empty discrete argument set");
  for (double& t : angles) t = normalize_angle(t);
  std::sort(angles.begin(), angles.end());
  for (std::size_t j = 1; j < angles.size(); ++j) {
    if (angles[j] - angles[j - 1] <= 1e-14)
      throw std::invalid_argument("duplicate angle in discrete argument set");
  }
  ArgumentSet a;
  a.kind = ArgumentKind::Discrete;
  a.lo = angles.front();
  a.hi = angles.back();
  a.angles = std::move(angles);
  return a;
}

ArgumentSet ArgumentSet::psk(int order) {
  if (order < 1) throw std::invalid_argument("PSK order must be positive");
  std::vector<double> angles(order);
  for (int k = 0; k < order; ++k) angles[k] = kTwoPi * k / order;
  return discrete(std::move(angles));
}

ArgumentSet ArgumentSet::singleton(double theta) { return discrete({theta}); }

bool ArgumentSet::is_singleton() const {
  return is_discrete() ? angles.size() == 1 : hi == lo;
}

double ArgumentSet::min_angle() const { return is_discrete() ? angles.front() : lo; }
double ArgumentSet::max_angle() const { return is_discrete() ? angles.back() : hi; }

double ArgumentSet::distance(double theta) const {
  if (is_discrete()) {
    double best = std::numeric_limits<double>::infinity();
    for (double a : angles) best = std::min(best, circular_distance(theta, a));
    return best;
  }
  const double offset = normalize_angle(theta - lo);
  if (offset <= hi - lo) return 0.0;
  return std::min(circular_distance(theta, lo), circular_distance(theta, hi));
}

bool ArgumentSet::contains(double theta, double tol) const { return distance(theta) <= tol; }

double evaluate_objective(const ProblemCQP& p, const ComplexVector& x) {
  if (x.size() != p.n || p.Q.rows() != p.n || p.Q.cols() != p.n || p.c.size() != p.n)
    throw std::invalid_argument("evaluate_objective: dimension mismatch");
  const Complex quad = x.dot(p.Q * x);  // x^H Q x
  const Complex lin = p.c.dot(x);       // c^H x
  return 0.5 * quad.real() + lin.real();
}

std::vector<std::string> validate(const ProblemCQP& p) {
  std::vector<std::string> errors;
  auto report = [&](auto&&... parts) {
    std::ostringstream os;
    (os << ... << parts);
    errors.push_back(os.str());
  };
  if (p.n <= 0) report("dimension n must be positive");
  if (p.Q.rows() != p.n || p.Q.cols() != p.n)
    report("Q has shape ", p.Q.rows(), "x", p.Q.cols(), ", expected ", p.n, "x", p.n);
  if (p.c.size() != p.n) report("c has length ", p.c.size(), ", expected ", p.n);
  if (static_cast<int>(p.bounds.size()) != p.n)
    report("expected ", p.n, " modulus bounds, got ", p.bounds.size());
  if (static_cast<int>(p.args.size()) != p.n)
    report("expected ", p.n, " argument sets, got ", p.args.size());
  if (!errors.empty()) return errors;

  if (!p.Q.allFinite()) report("Q has non-finite entries");
  if (!p.c.allFinite()) report("c has non-finite entries");
  for (int i = 0; i < p.n; ++i) {
    if (std::abs(p.Q(i, i).imag()) > 1e-12)
      report("not Hermitian: Q(", i, ",", i, ") has imaginary part ", p.Q(i, i).imag());
    for (int j = i + 1; j < p.n; ++j) {
      if (std::abs(p.Q(i, j) - std::conj(p.Q(j, i))) > 1e-12)
        report("not Hermitian: Q(", i, ",", j, ") != conj(Q(", j, ",", i, "))");
    }
  }
  for (int i = 0; i < p.n; ++i) {
    const auto& b = p.bounds[i];
    if (!std::isfinite(b.lo) || !std::isfinite(b.hi)) report("modulus bounds ", i, " not finite");
    if (b.lo < 0.0) report("modulus bounds ", i, " have negative lower bound");
    if (b.hi < b.lo) report("modulus bounds reversed at coordinate ", i);

    const auto& a = p.args[i];
    if (a.is_interval()) {
      if (!(a.lo >= 0.0 && a.lo < kTwoPi)) report("argument interval ", i, " lo not in [0, 2pi)");
      if (!(a.hi >= a.lo)) report("argument interval ", i, " has hi < lo");
      if (a.hi - a.lo > kTwoPi + 1e-12) report("argument interval ", i, " wider than 2pi");
    } else {
      if (a.angles.empty()) report("discrete argument set ", i, " is empty");
      for (std::size_t j = 0; j < a.angles.size(); ++j) {
        if (!(a.angles[j] >= 0.0 && a.angles[j] < kTwoPi))
          report("discrete argument set ", i, " has angle outside [0, 2pi)");
        if (j > 0 && !(a.angles[j] > a.angles[j - 1]))
          report("discrete argument set ", i, " not strictly increasing");
      }
    }
  }
  return errors;
}

void require_valid(const ProblemCQP& p) {
  const auto errors = validate(p);
  if (errors.empty()) return;
  std::string msg = "invalid problem:";
  for (const auto& e : errors) msg += "\n  " + e;
  throw std::invalid_argument(msg);
}

ComplexityConstants compute_constants(const ProblemCQP& p, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  ComplexityConstants k;
  for (const auto& b : p.bounds) k.u_max = std::max(k.u_max, b.hi);
  const double n = p.n;
  const double q_fro = p.Q.norm();
  k.m_f = q_fro * std::sqrt(n) * k.u_max + p.c.norm();
  k.m1 = std::sqrt(n) * k.m_f + std::pow(n, 1.5) * k.u_max * q_fro;
  k.m2 = 0.5 * std::pow(n, 1.5) * q_fro;
  const double inf = std::numeric_limits<double>::infinity();
  const double msum = k.m1 + k.m2;
  k.kappa1 = (k.u_max * msum > 0.0) ? std::sqrt(8.0 * epsilon / (k.u_max * msum)) : inf;
  k.kappa2 = (msum > 0.0) ? std::sqrt(4.0 * epsilon / msum) : inf;
  return k;
}

bool is_feasible(const ProblemCQP& p, const ComplexVector& x, double tol) {
  if (x.size() != p.n) return false;
  for (int i = 0; i < p.n; ++i) {
    const double mod = std::abs(x[i]);
    if (mod < p.bounds[i].lo - tol || mod > p.bounds[i].hi + tol) return false;
    // The argument of a (numerically) zero coordinate is unconstrained.
    if (mod > tol && !p.args[i].contains(std::arg(x[i]), tol)) return false;
  }
  return true;
}

}  // namespace cqpbb
