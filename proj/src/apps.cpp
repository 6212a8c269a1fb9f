#include "cqpbb/apps.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <omp.h>

#include "cqpbb/rng.hpp"

namespace cqpbb {

void MimoSpec::check() const {
  if (n < 1) throw std::invalid_argument("mimo: n must be at least 1");
  if (m < n) throw std::invalid_argument("mimo: m must be at least n");
  if (M < 2) throw std::invalid_argument("mimo: constellation order must be at least 2");
  if (!std::isfinite(snr_db)) throw std::invalid_argument("mimo: snr must be finite");
}

void RadarSpec::check() const {
  if (n < 1) throw std::invalid_argument("radar: n must be at least 1");
  if (rho && !(*rho > 0.0 && *rho < 1.0)) throw std::invalid_argument("radar: rho must lie in (0, 1)");
  if (!(delta_angle > 0.0 && delta_angle <= kPi / 2.0))
    throw std::invalid_argument("radar: delta_angle must lie in (0, pi/2]");
  if (!std::isfinite(fd_tr)) throw std::invalid_argument("radar: fd_tr must be finite");
  if (x0.empty() && n != 7) throw std::invalid_argument("radar: x0 is required unless n = 7");
  if (!x0.empty() && static_cast<int>(x0.size()) != n)
    throw std::invalid_argument("radar: x0 length differs from n");
  for (double v : x0) {
    if (v == 0.0 || !std::isfinite(v)) throw std::invalid_argument("radar: x0 entries must be nonzero");
  }
}

void VbSpec::check() const {
  if (m < 1 || n < 1) throw std::invalid_argument("vb: m and n must be at least 1");
  if (!power.empty() && static_cast<int>(power.size()) != n)
    throw std::invalid_argument("vb: power length differs from n");
  for (double p : power) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("vb: powers must be nonnegative");
  }
}

std::vector<double> barker7() { return {1, 1, 1, -1, -1, 1, -1}; }

namespace {

Eigen::MatrixXcd gaussian_matrix(Rng& g, int rows, int cols) {
  Eigen::MatrixXcd a(rows, cols);
  // Row-major draw order, fixed by the instance format.
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = g.complex_normal();
  return a;
}

HermitianMatrix hermitize(const Eigen::MatrixXcd& a) {
  HermitianMatrix h = 0.5 * (a + a.adjoint());
  for (Eigen::Index i = 0; i < h.rows(); ++i) h(i, i) = h(i, i).real();
  return h;
}

}  // namespace

Instance gen_mimo(const MimoSpec& spec) {
  spec.check();
  Rng gh(spec.seed, "mimo.H");
  Rng gx(spec.seed, "mimo.x");
  Rng gv(spec.seed, "mimo.v");
  const Eigen::MatrixXcd H = gaussian_matrix(gh, spec.m, spec.n);
  ComplexVector xs(spec.n);
  for (int i = 0; i < spec.n; ++i) xs[i] = std::polar(1.0, kTwoPi * gx.index(spec.M) / spec.M);
  ComplexVector v(spec.m);
  for (int i = 0; i < spec.m; ++i) v[i] = gv.complex_normal();

  const ComplexVector hx = H * xs;
  const double sigma = std::sqrt(hx.squaredNorm() / (spec.n * std::pow(10.0, spec.snr_db / 10.0)));
  const ComplexVector r = hx + sigma * v;

  Instance inst;
  inst.family = "mimo";
  auto& p = inst.problem;
  p.n = spec.n;
  p.Q = hermitize(H.adjoint() * H);
  p.c = -H.adjoint() * r;
  p.bounds.assign(spec.n, {1.0, 1.0});
  p.args.assign(spec.n, ArgumentSet::psk(spec.M));
  inst.planted = xs;
  inst.display_offset = 0.5 * r.squaredNorm();
  return inst;
}

Instance gen_radar(const RadarSpec& spec) {
  spec.check();
  const std::vector<double> x0 = spec.x0.empty() ? barker7() : spec.x0;
  const int n = spec.n;
  double rho = 0.0;
  if (spec.rho) {
    rho = *spec.rho;
  } else {
    Rng g(spec.seed, "radar.rho");
    rho = g.uniform(0.2, 0.8);
  }
  Eigen::MatrixXd R(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) R(i, j) = std::pow(rho, std::abs(i - j));
  const Eigen::MatrixXd Rinv = R.llt().solve(Eigen::MatrixXd::Identity(n, n));
  ComplexVector steer(n);
  for (int k = 0; k < n; ++k) steer[k] = std::polar(1.0, kTwoPi * spec.fd_tr * k);
  const Eigen::MatrixXcd ppc = (steer * steer.adjoint()).conjugate();
  const Eigen::MatrixXcd W = Rinv.cast<Complex>().cwiseProduct(ppc);

  Instance inst;
  inst.family = "radar";
  inst.rho = rho;
  auto& p = inst.problem;
  p.n = n;
  p.Q = hermitize(-2.0 * W);
  p.c = ComplexVector::Zero(n);
  p.bounds.assign(n, {1.0, 1.0});
  for (int i = 0; i < n; ++i) {
    const double a0 = std::arg(Complex(x0[i], 0.0));
    p.args.push_back(ArgumentSet::interval(a0 - spec.delta_angle, a0 + spec.delta_angle));
  }
  inst.display_scale = -1.0;
  return inst;
}

Instance gen_vb(const VbSpec& spec) {
  spec.check();
  Rng g(spec.seed, "vb.h");
  const Eigen::MatrixXcd Hm = gaussian_matrix(g, spec.m, spec.n);  // row j is h_j^H
  Instance inst;
  inst.family = "vb";
  auto& p = inst.problem;
  p.n = spec.n;
  p.Q = hermitize(-2.0 * Hm.adjoint() * Hm);
  p.c = ComplexVector::Zero(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    const double pw = spec.power.empty() ? 1.0 : spec.power[i];
    p.bounds.push_back({0.0, std::sqrt(pw)});
  }
  p.args.assign(spec.n, ArgumentSet::full_circle());
  inst.display_scale = -1.0;
  return inst;
}

long long enumeration_size(const ProblemCQP& p) {
  long long total = 1;
  for (int i = 0; i < p.n; ++i) {
    if (!p.args[i].is_discrete() || !p.bounds[i].is_fixed()) return -1;
    const long long k = static_cast<long long>(p.args[i].angles.size());
    if (total > std::numeric_limits<long long>::max() / k) return std::numeric_limits<long long>::max();
    total *= k;
  }
  return total;
}

namespace {

struct Enumerator {
  const ProblemCQP& p;
  std::vector<std::vector<Complex>> symbols;  // per coordinate

  explicit Enumerator(const ProblemCQP& prob) : p(prob) {
    for (int i = 0; i < p.n; ++i) {
      std::vector<Complex> s;
      for (double t : p.args[i].angles) s.push_back(std::polar(p.bounds[i].hi, t));
      symbols.push_back(std::move(s));
    }
  }

  // Point with linear index idx; the last coordinate varies fastest.
  void decode(long long idx, ComplexVector& x) const {
    for (int i = p.n - 1; i >= 0; --i) {
      const long long k = static_cast<long long>(symbols[i].size());
      x[i] = symbols[i][idx % k];
      idx /= k;
    }
  }

  // Best point in [begin, end): strict improvement keeps the first minimizer.
  std::pair<double, long long> scan(long long begin, long long end) const {
    ComplexVector x(p.n);
    double best = std::numeric_limits<double>::infinity();
    long long arg = begin;
    for (long long idx = begin; idx < end; ++idx) {
      decode(idx, x);
      const double f = evaluate_objective(p, x);
      if (f < best) {
        best = f;
        arg = idx;
      }
    }
    return {best, arg};
  }
};

long long checked_size(const ProblemCQP& p, long long max_points) {
  require_valid(p);
  const long long total = enumeration_size(p);
  if (total < 0) throw std::invalid_argument("brute force needs discrete arguments and fixed moduli");
  if (total > max_points) throw std::invalid_argument("brute force: too many points");
  return total;
}

OracleResult finish(const Enumerator& e, double value, long long idx, long long total) {
  OracleResult out;
  out.value = value;
  out.x.resize(e.p.n);
  e.decode(idx, out.x);
  out.points = total;
  return out;
}

}  // namespace

OracleResult brute_force_serial(const ProblemCQP& p, long long max_points) {
  const long long total = checked_size(p, max_points);
  const Enumerator e(p);
  const auto [value, idx] = e.scan(0, total);
  return finish(e, value, idx, total);
}

OracleResult brute_force_parallel(const ProblemCQP& p, long long max_points) {
  const long long total = checked_size(p, max_points);
  const Enumerator e(p);
  const int chunks = std::max(1, omp_get_max_threads()) * 8;
  std::vector<std::pair<double, long long>> part(chunks);
#pragma omp parallel for schedule(dynamic, 1)
  for (int c = 0; c < chunks; ++c) {
    const long long begin = total * c / chunks;
    const long long end = total * (c + 1) / chunks;
    part[c] = begin < end ? e.scan(begin, end)
                          : std::pair{std::numeric_limits<double>::infinity(), begin};
  }
  // Chunks are ordered by index, so keeping strict improvements reproduces
  // the serial minimizer.
  auto best = part[0];
  for (int c = 1; c < chunks; ++c) {
    if (part[c].first < best.first) best = part[c];
  }
  return finish(e, best.first, best.second, total);
}

}  // namespace cqpbb
