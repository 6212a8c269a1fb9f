#include <doctest.h>

#include <cmath>
#include <random>

#include "cqpbb/apps.hpp"
#include "cqpbb/bb.hpp"
#include "cqpbb/envelope.hpp"
#include "cqpbb/io.hpp"
#include "cqpbb/rng.hpp"
#include "support.hpp"

using namespace cqpbb;
using namespace testing;

TEST_CASE("random streams are reproducible and well formed") {
  Rng a(5, "x"), b(5, "x"), c(5, "y");
  for (int k = 0; k < 100; ++k) CHECK(a.next_u64() == b.next_u64());
  CHECK(Rng(5, "x").next_u64() != c.next_u64());
  Rng g(1, "moments");
  double s = 0, s2 = 0, re2 = 0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double u = g.uniform();
    CHECK_UNARY(u >= 0.0 && u < 1.0);
    const double z = g.normal();
    s += z;
    s2 += z * z;
    re2 += std::norm(g.complex_normal());
    const int i = g.index(7);
    CHECK_UNARY(i >= 0 && i < 7);
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.01);
  CHECK(std::abs(re2 / n - 1.0) < 0.01);
}

TEST_CASE("MIMO instances") {
  const MimoSpec spec{8, 6, 4, 15.0, 1};
  const auto inst = gen_mimo(spec);
  const auto& p = inst.problem;
  CHECK(p.n == 6);
  CHECK(validate(p).empty());
  for (int i = 0; i < 6; ++i) {
    CHECK(p.bounds[i] == ModulusBounds{1.0, 1.0});
    CHECK(p.args[i] == ArgumentSet::psk(4));
  }
  CHECK(is_feasible(p, inst.planted));

  InstanceFile f;
  f.kind = "mimo";
  f.mimo = spec;
  InstanceFile raw;
  raw.raw = gen_mimo(spec);
  InstanceFile raw2;
  raw2.raw = inst;
  CHECK(instance_to_json(raw).dump() == instance_to_json(raw2).dump());

  // Recreate the channel and noise from their substreams and recover sigma
  // from c = -H^H (H x* + sigma v).
  Rng gh(spec.seed, "mimo.H"), gv(spec.seed, "mimo.v");
  Eigen::MatrixXcd H(spec.m, spec.n);
  for (int i = 0; i < spec.m; ++i)
    for (int j = 0; j < spec.n; ++j) H(i, j) = gh.complex_normal();
  ComplexVector v(spec.m);
  for (int i = 0; i < spec.m; ++i) v[i] = gv.complex_normal();
  CHECK((p.Q - H.adjoint() * H).cwiseAbs().maxCoeff() < 1e-12);
  const ComplexVector hv = H.adjoint() * v;
  const ComplexVector resid = -p.c - p.Q * inst.planted;
  const double sigma = resid.norm() / hv.norm();
  CHECK((resid - sigma * hv).norm() < 1e-10);
  const double snr = 10.0 * std::log10((H * inst.planted).squaredNorm() / (sigma * sigma * spec.n));
  CHECK(snr == doctest::Approx(spec.snr_db).epsilon(1e-9));
  // The display offset makes the planted point's value the residual norm.
  const ComplexVector r = H * inst.planted + sigma * v;
  CHECK(inst.display(evaluate_objective(p, inst.planted)) ==
        doctest::Approx(0.5 * (H * inst.planted - r).squaredNorm()).epsilon(1e-9));
}

TEST_CASE("noiseless MIMO recovers the planted symbols") {
  const auto inst = gen_mimo({8, 4, 4, 300.0, 3});
  const auto o = brute_force_serial(inst.problem);
  CHECK((o.x - inst.planted).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(inst.display(o.value)) < 1e-9);
}

TEST_CASE("radar instances") {
  RadarSpec spec;
  spec.seed = 3;
  const auto inst = gen_radar(spec);
  const auto& p = inst.problem;
  CHECK(validate(p).empty());
  CHECK_UNARY(inst.rho >= 0.2 && inst.rho <= 0.8);
  for (int i = 0; i < 7; ++i) CHECK(width_argument(p.args[i]) == doctest::Approx(kPi / 3));

  // R^-1 of the AR(1) correlation is tridiagonal with diagonal
  // (1, 1 + rho^2, ..., 1 + rho^2, 1) / (1 - rho^2).
  const double rho = inst.rho;
  for (int i = 0; i < 7; ++i) {
    const double d = (i == 0 || i == 6 ? 1.0 : 1.0 + rho * rho) / (1.0 - rho * rho);
    CHECK(p.Q(i, i).real() == doctest::Approx(-2.0 * d).epsilon(1e-10));
    CHECK(p.Q(i, i).imag() == 0.0);
    if (i + 1 < 7) CHECK(std::abs(p.Q(i, i + 1)) == doctest::Approx(2.0 * rho / (1.0 - rho * rho)).epsilon(1e-10));
    if (i + 2 < 7) CHECK(std::abs(p.Q(i, i + 2)) < 1e-10);
  }
  CHECK((p.Q - p.Q.adjoint()).cwiseAbs().maxCoeff() < 1e-12);

  // x0 is feasible and every feasible point is within the similarity radius.
  const auto x0v = barker7();
  ComplexVector x0(7);
  for (int i = 0; i < 7; ++i) x0[i] = x0v[i];
  CHECK(is_feasible(p, x0));
  const double radius = std::sqrt(2.0 - 2.0 * std::cos(spec.delta_angle));
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 1000; ++s) {
    ComplexVector x(7);
    for (int i = 0; i < 7; ++i) x[i] = std::polar(1.0, p.args[i].lo + (p.args[i].hi - p.args[i].lo) * u(g));
    CHECK((x - x0).cwiseAbs().maxCoeff() <= radius + 1e-12);
  }

  RadarSpec white = spec;
  white.rho = 1e-12;
  const auto w = gen_radar(white);
  for (int i = 0; i < 7; ++i) CHECK(w.problem.Q(i, i).real() == doctest::Approx(-2.0));

  RadarSpec bad = spec;
  bad.n = 5;
  CHECK_THROWS_AS(gen_radar(bad), std::invalid_argument);
  bad.x0 = {1, -1, 1, 1, -1};
  CHECK_NOTHROW(gen_radar(bad));
}

TEST_CASE("beamforming instances") {
  const auto inst = gen_vb({3, 5, {}, 7});
  const auto& p = inst.problem;
  CHECK(validate(p).empty());
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<HermitianMatrix>(p.Q).eigenvalues();
  CHECK(ev.maxCoeff() < 1e-10);
  int nonzero = 0;
  for (int i = 0; i < 5; ++i) nonzero += std::abs(ev[i]) > 1e-9;
  CHECK(nonzero <= 3);
  for (int i = 0; i < 5; ++i) {
    CHECK(p.args[i] == ArgumentSet::full_circle());
    CHECK(p.bounds[i] == ModulusBounds{0.0, 1.0});
  }
  const auto powered = gen_vb({2, 2, {4.0, 0.25}, 1});
  CHECK(powered.problem.bounds[0].hi == doctest::Approx(2.0));
  CHECK(powered.problem.bounds[1].hi == doctest::Approx(0.5));

  // Scalar channel h = 1: the best transmission has |x| = 1 and power 1.
  ProblemCQP s;
  s.n = 1;
  s.Q = HermitianMatrix::Constant(1, 1, -2.0);
  s.c = ComplexVector::Zero(1);
  s.bounds = {{0.0, 1.0}};
  s.args = {ArgumentSet::full_circle()};
  const auto rep = run(s, BBConfig{});
  CHECK(rep.objective == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(std::abs(rep.x[0]) == doctest::Approx(1.0).epsilon(1e-4));

  s.Q.setZero();
  CHECK(std::abs(run(s, BBConfig{}).objective) < 1e-9);
}

TEST_CASE("brute force oracle") {
  ProblemCQP p;
  p.n = 2;
  p.Q = HermitianMatrix::Identity(2, 2);
  p.c = ComplexVector::Zero(2);
  p.c[0] = -1.0;
  p.bounds.assign(2, {1.0, 1.0});
  p.args.assign(2, ArgumentSet::psk(4));
  const auto o = brute_force_serial(p);
  CHECK(o.points == 16);
  CHECK(o.value == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(o.x[0] - 1.0) < 1e-12);
  CHECK(std::abs(o.x[1] - 1.0) < 1e-12);

  ProblemCQP one;
  one.n = 1;
  one.Q = HermitianMatrix::Constant(1, 1, 3.0);
  one.c = ComplexVector::Constant(1, Complex(1.0, 2.0));
  one.bounds = {{2.0, 2.0}};
  one.args = {ArgumentSet::singleton(0.0)};
  CHECK(brute_force_serial(one).value == doctest::Approx(0.5 * 3.0 * 4.0 + 2.0));

  std::mt19937_64 g(12);
  for (int t = 0; t < 10; ++t) {
    const auto q = random_discrete_problem(g, 3 + t % 4, t % 2 ? 4 : 8);
    ComplexVector xm;
    const double v = enumerate_minimum(q.Q, q.c, psk_symbols(q.n, q.args[0].angles.size()), &xm);
    const auto a = brute_force_serial(q);
    const auto b = brute_force_parallel(q);
    CHECK(a.value == doctest::Approx(v).epsilon(1e-12));
    CHECK(a.value == b.value);
    CHECK(a.x == b.x);
  }

  ProblemCQP cont = p;
  cont.args[0] = ArgumentSet::interval(0.0, 1.0);
  CHECK_THROWS_AS(brute_force_serial(cont), std::invalid_argument);
  CHECK(enumeration_size(cont) == -1);
  ProblemCQP big = random_discrete_problem(g, 12, 8);
  CHECK(enumeration_size(big) == (1LL << 36));
  CHECK_THROWS_AS(brute_force_parallel(big), std::invalid_argument);
}
