#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "cqpbb/model.hpp"

namespace testing {

using cqpbb::Complex;
using cqpbb::ComplexVector;
using cqpbb::HermitianMatrix;

inline HermitianMatrix random_hermitian(std::mt19937_64& g, int n) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex(nd(g), nd(g));
  HermitianMatrix h = 0.5 * (a + a.adjoint());
  for (int i = 0; i < n; ++i) h(i, i) = h(i, i).real();
  return h;
}

inline ComplexVector random_vector(std::mt19937_64& g, int n, double scale = 1.0) {
  std::normal_distribution<double> nd;
  ComplexVector v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * Complex(nd(g), nd(g));
  return v;
}

// Discrete, fixed-modulus problem with random data.
inline cqpbb::ProblemCQP random_discrete_problem(std::mt19937_64& g, int n, int order) {
  cqpbb::ProblemCQP p;
  p.n = n;
  p.Q = random_hermitian(g, n);
  p.c = random_vector(g, n);
  p.bounds.assign(n, {1.0, 1.0});
  p.args.assign(n, cqpbb::ArgumentSet::psk(order));
  return p;
}

// Written out term by term rather than with matrix products.
inline double objective_by_terms(const HermitianMatrix& Q, const ComplexVector& c, const ComplexVector& x) {
  Complex quad = 0.0;
  for (int i = 0; i < x.size(); ++i)
    for (int j = 0; j < x.size(); ++j) quad += std::conj(x[i]) * Q(i, j) * x[j];
  double lin = 0.0;
  for (int i = 0; i < x.size(); ++i) lin += (std::conj(c[i]) * x[i]).real();
  return 0.5 * quad.real() + lin;
}

// Exhaustive minimum over a product of symbol lists, independent of the
// library's enumerator.
inline double enumerate_minimum(const HermitianMatrix& Q, const ComplexVector& c,
                                const std::vector<std::vector<Complex>>& symbols, ComplexVector* arg = nullptr) {
  const int n = static_cast<int>(symbols.size());
  std::vector<int> digit(n, 0);
  ComplexVector x(n);
  double best = INFINITY;
  while (true) {
    for (int i = 0; i < n; ++i) x[i] = symbols[i][digit[i]];
    const double f = objective_by_terms(Q, c, x);
    if (f < best) {
      best = f;
      if (arg) *arg = x;
    }
    int i = n - 1;
    while (i >= 0 && ++digit[i] == static_cast<int>(symbols[i].size())) digit[i--] = 0;
    if (i < 0) break;
  }
  return best;
}

inline std::vector<std::vector<Complex>> psk_symbols(int n, int order) {
  std::vector<Complex> s;
  for (int k = 0; k < order; ++k) s.push_back(std::polar(1.0, 2.0 * M_PI * k / order));
  return std::vector<std::vector<Complex>>(n, s);
}

}  // namespace testing
