// Serial vs OpenMP timings for the two parallel kernels: Schur-complement
// assembly on ECSDR programs and exhaustive enumeration on PSK problems.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include <omp.h>

#include "cqpbb/apps.hpp"
#include "cqpbb/conic.hpp"
#include "cqpbb/schur.hpp"

using namespace cqpbb;

namespace {

template <class F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

BlockValues random_scaling(const ConicProgram& prog, std::mt19937_64& g) {
  std::normal_distribution<double> nd;
  BlockValues w;
  for (const auto& b : prog.blocks) {
    if (b.kind == BlockKind::Psd) {
      Eigen::MatrixXd a(b.size, b.size);
      for (int i = 0; i < a.size(); ++i) a.data()[i] = nd(g);
      w.push_back(a * a.transpose() / b.size + Eigen::MatrixXd::Identity(b.size, b.size));
    } else {
      Eigen::MatrixXd v(b.size, 1);
      for (int i = 0; i < b.size; ++i) v(i, 0) = 0.5 + std::abs(nd(g));
      w.push_back(v);
    }
  }
  return w;
}

bool bench_schur(int n, int reps) {
  const Instance inst = gen_mimo({n + 4, n, 4, 15.0, 1});
  const RelaxationProgram rp = build_ecsdr(inst.problem, SearchBox::from_problem(inst.problem));
  const SchurPattern pat = make_schur_pattern(rp.program);
  std::mt19937_64 g(7);
  const BlockValues w = random_scaling(rp.program, g);
  Eigen::MatrixXd ms, mp;
  const double ts = best_of(reps, [&] { ms = assemble_schur_serial(pat, w); });
  const double tp = best_of(reps, [&] { mp = assemble_schur_parallel(pat, w); });
  const bool same = (ms - mp).cwiseAbs().maxCoeff() == 0.0;
  std::printf("schur      n=%-3d rows=%-5d serial %9.4f s  parallel %9.4f s  speedup %5.2f  %s\n", n, pat.num_rows,
              ts, tp, ts / tp, same ? "identical" : "MISMATCH");
  return same;
}

bool bench_brute(int n, int order, int reps) {
  const Instance inst = gen_mimo({n + 2, n, order, 10.0, 3});
  OracleResult s, p;
  const double ts = best_of(reps, [&] { s = brute_force_serial(inst.problem); });
  const double tp = best_of(reps, [&] { p = brute_force_parallel(inst.problem); });
  const bool same = s.value == p.value && s.x == p.x && s.points == p.points;
  std::printf("brute      n=%-3d M=%-2d points=%-9lld serial %9.4f s  parallel %9.4f s  speedup %5.2f  %s\n", n,
              order, s.points, ts, tp, ts / tp, same ? "identical" : "MISMATCH");
  return same;
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  bool ok = true;
  for (int n : {10, 20, 40}) ok = bench_schur(n, 5) && ok;
  ok = bench_brute(8, 4, 3) && ok;
  ok = bench_brute(10, 4, 2) && ok;
  ok = bench_brute(6, 8, 2) && ok;
  return ok ? 0 : 1;
}
