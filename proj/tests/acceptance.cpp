// End-to-end acceptance run: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "cqpbb/apps.hpp"
#include "cqpbb/bb.hpp"
#include "cqpbb/sdpsolver.hpp"
#include "envelope_properties.hpp"
#include "support.hpp"

using namespace cqpbb;
using namespace testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int failures = 0;
Clock::time_point phase_start;

void report(int id, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %s [%.1f s]\n", ok ? "PASS" : "FAIL", id, detail.c_str(), seconds_since(phase_start));
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Residuals of (Z, y, S) recomputed from the program's entries.
struct Recomputed {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double eig_z = INFINITY;
  double eig_s = INFINITY;
};

// Entry e of a symmetric coefficient matrix contributes to both triangles.
double entry_pair(const ConicProgram& prog, const MatrixEntry& e, const BlockValues& z) {
  if (prog.blocks[e.block].kind == BlockKind::Nonneg) return e.value * z[e.block](e.row, 0);
  const auto& m = z[e.block];
  return e.row == e.col ? e.value * m(e.row, e.col) : e.value * (m(e.row, e.col) + m(e.col, e.row));
}

void subtract_entry(const ConicProgram& prog, const MatrixEntry& e, double scale, BlockValues& out) {
  if (prog.blocks[e.block].kind == BlockKind::Nonneg) {
    out[e.block](e.row, 0) -= scale * e.value;
    return;
  }
  out[e.block](e.row, e.col) -= scale * e.value;
  if (e.row != e.col) out[e.block](e.col, e.row) -= scale * e.value;
}

Recomputed recompute(const ConicProgram& prog, const ConicSolution& sol) {
  Recomputed r;
  BlockValues zero;
  for (const auto& b : prog.blocks)
    zero.push_back(b.kind == BlockKind::Psd ? Eigen::MatrixXd::Zero(b.size, b.size) : Eigen::MatrixXd::Zero(b.size, 1));
  BlockValues C = zero;
  for (const auto& e : prog.objective) subtract_entry(prog, e, -1.0, C);
  double bmax = 0.0;
  for (const auto& c : prog.constraints) bmax = std::max(bmax, std::abs(c.rhs));
  double cmax = 0.0;
  for (const auto& m : C)
    if (m.size() > 0) cmax = std::max(cmax, m.cwiseAbs().maxCoeff());

  BlockValues dual_res = C;
  for (std::size_t b = 0; b < C.size(); ++b) dual_res[b] -= sol.s[b];
  double by = 0.0;
  for (int k = 0; k < prog.num_constraints(); ++k) {
    const auto& c = prog.constraints[k];
    double az = 0.0;
    for (const auto& e : c.terms) {
      az += entry_pair(prog, e, sol.z);
      subtract_entry(prog, e, sol.y[k], dual_res);
    }
    r.primal = std::max(r.primal, std::abs(az - c.rhs));
    by += c.rhs * sol.y[k];
  }
  r.primal /= 1.0 + bmax;
  double dmax = 0.0;
  for (const auto& m : dual_res)
    if (m.size() > 0) dmax = std::max(dmax, m.cwiseAbs().maxCoeff());
  r.dual = dmax / (1.0 + cmax);
  double cz = 0.0;
  for (std::size_t b = 0; b < C.size(); ++b) cz += (C[b].array() * sol.z[b].array()).sum();
  const double pobj = cz + prog.objective_offset;
  const double dobj = by + prog.objective_offset;
  r.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
  for (std::size_t b = 0; b < prog.blocks.size(); ++b) {
    if (prog.blocks[b].size == 0) continue;
    if (prog.blocks[b].kind == BlockKind::Psd) {
      const auto sym = [](const Eigen::MatrixXd& m) { return Eigen::MatrixXd(0.5 * (m + m.transpose())); };
      r.eig_z = std::min(r.eig_z, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym(sol.z[b])).eigenvalues()[0]);
      r.eig_s = std::min(r.eig_s, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym(sol.s[b])).eigenvalues()[0]);
    } else {
      r.eig_z = std::min(r.eig_z, sol.z[b].minCoeff());
      r.eig_s = std::min(r.eig_s, sol.s[b].minCoeff());
    }
  }
  return r;
}

// Collects every optimal solution returned by the solver during the run.
struct SolutionAudit {
  std::mutex mu;
  long optimal = 0;
  long bad = 0;
  double worst_res = 0.0;
  double worst_eig = INFINITY;

  void operator()(const ConicProgram& prog, const ConicSolution& sol) {
    if (sol.status != SolveStatus::Optimal) return;
    const Recomputed r = recompute(prog, sol);
    const double res = std::max({r.primal, r.dual, r.gap});
    const double eig = std::min(r.eig_z, r.eig_s);
    std::lock_guard<std::mutex> lock(mu);
    ++optimal;
    worst_res = std::max(worst_res, res);
    worst_eig = std::min(worst_eig, eig);
    if (res > 1e-7 || eig < -1e-7) ++bad;
  }
};

SolutionAudit audit;

BBConfig config(bool verify) {
  BBConfig c;
  c.epsilon = 1e-4;
  c.verify = verify;
  c.solver.audit = [](const ConicProgram& p, const ConicSolution& s) { audit(p, s); };
  return c;
}

struct KCheck {
  long runs = 0;
  long over = 0;
  void add(const RunReport& r) {
    ++runs;
    if (static_cast<double>(r.iterations) > r.k_bound) ++over;
  }
} k_check;

long lemma1_checks = 0, lemma1_failures = 0;
double lemma1_worst_margin = INFINITY;

void criterion1() {
  int mismatches = 0;
  double worst = 0.0, bb_time = 0.0;
  for (const double snr : {5.0, 15.0}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto inst = gen_mimo({8, 6, 4, snr, seed});
      const double nu = enumerate_minimum(inst.problem.Q, inst.problem.c, psk_symbols(6, 4));
      auto cfg = config(true);
      cfg.parallel_children = false;
      const auto t0 = Clock::now();
      const auto rep = run(inst.problem, cfg);
      bb_time += seconds_since(t0);
      k_check.add(rep);
      const double diff = std::abs(rep.objective - nu);
      worst = std::max(worst, diff);
      if (diff > 1e-4 || rep.status != RunStatus::EpsilonOptimal) ++mismatches;
      for (const auto& v : rep.verification) {
        if (v.check != "lemma1") continue;
        ++lemma1_checks;
        lemma1_worst_margin = std::min(lemma1_worst_margin, v.rhs - v.lhs);
        if (!v.passed) ++lemma1_failures;
      }
    }
  }
  report(1, mismatches == 0 && bb_time < 120.0,
         fmt("20 MIMO (8,6,4) instances, %d mismatches, max |ObjVal - oracle| = %.2e, BB time %.2f s (single core)",
             mismatches, worst, bb_time));
}

void criterion2() {
  int bad_order = 0, bad_gap = 0, count = 0;
  double worst = INFINITY, gmin = INFINITY, gmax = -INFINITY;
  auto check = [&](const RunReport& rep) {
    ++count;
    k_check.add(rep);
    worst = std::min(worst, rep.lbd_e - rep.lbd_c);
    if (rep.lbd_e < rep.lbd_c - 1e-7) ++bad_order;
    if (!(rep.cld_gap >= 0.0 && rep.cld_gap <= 100.0)) ++bad_gap;
    gmin = std::min(gmin, rep.cld_gap);
    gmax = std::max(gmax, rep.cld_gap);
  };
  for (std::uint64_t seed = 1; seed <= 34; ++seed) {
    const int n = 4 + static_cast<int>(seed % 5);
    check(run(gen_mimo({n + 2, n, seed % 3 == 0 ? 8 : 4, seed % 2 ? 5.0 : 15.0, 100 + seed}).problem, config(false)));
  }
  for (std::uint64_t seed = 1; seed <= 33; ++seed) {
    RadarSpec s;
    s.delta_angle = seed % 2 ? kPi / 6 : kPi / 3;
    s.seed = 100 + seed;
    check(run(gen_radar(s).problem, config(false)));
  }
  for (std::uint64_t seed = 1; seed <= 33; ++seed)
    check(run(gen_vb({seed % 2 ? 5 : 10, 5, {}, 100 + seed}).problem, config(false)));
  report(2, bad_order == 0 && bad_gap == 0 && count == 100,
         fmt("%d instances, %d ordering violations (min LBdE - LBdC = %.2e), CldGap in [%.2f, %.2f]", count,
             bad_order, worst, gmin, gmax));
}

void criterion3() {
  int bad = 0;
  double worst = 0.0;
  std::vector<double> iters;
  for (const int m : {5, 10}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto rep = run(gen_vb({m, 5, {}, seed}).problem, config(false));
      k_check.add(rep);
      const double rel = std::abs(rep.lbd_e - rep.lbd_c) / (1.0 + std::abs(rep.lbd_c));
      worst = std::max(worst, rel);
      if (rel > 1e-6) ++bad;
      iters.push_back(static_cast<double>(rep.iterations));
    }
  }
  const double med = median(iters);
  report(3, bad == 0 && med <= 20.0,
         fmt("20 VB instances, max |LBdE - LBdC|/(1+|LBdC|) = %.2e, median iterations %.1f", worst, med));
}

void criterion4() {
  int exact = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = gen_mimo({15, 10, 4, 25.0, seed});
    const auto rep = run(inst.problem, config(false));
    k_check.add(rep);
    const double obj = inst.display(rep.objective);
    const double lbd = inst.display(rep.lbd_e);
    if (obj - lbd <= 1e-3 * (1.0 + std::abs(obj))) ++exact;
  }
  report(4, exact >= 16, fmt("%d of 20 MIMO (15,10,4) SNR 25 instances have a tight root bound", exact));
}

void criterion5() {
  std::vector<double> gaps;
  int bad = 0;
  long max_iter = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RadarSpec s;
    s.delta_angle = kPi / 6;
    s.seed = seed;
    const auto rep = run(gen_radar(s).problem, config(false));
    k_check.add(rep);
    gaps.push_back(rep.cld_gap);
    max_iter = std::max(max_iter, rep.iterations);
    if (rep.status != RunStatus::EpsilonOptimal || rep.objective - rep.final_lower > 1e-4 || rep.iterations > 100)
      ++bad;
  }
  const double med = median(gaps);
  report(5, med >= 85.0 && bad == 0,
         fmt("5 radar instances, median CldGap %.2f%%, max iterations %ld, %d runs without a certified gap", med,
             max_iter, bad));
}

void criterion6() {
  report(6, lemma1_checks > 0 && lemma1_failures == 0,
         fmt("%ld per-iteration checks over the criterion-1 runs, %ld violations, min slack %.3g", lemma1_checks,
             lemma1_failures, lemma1_worst_margin));
}

void criterion7() {
  ProblemCQP toy;
  toy.n = 2;
  toy.Q = HermitianMatrix::Identity(2, 2);
  toy.c = ComplexVector::Zero(2);
  toy.c[0] = -1.0;
  toy.bounds.assign(2, {1.0, 1.0});
  toy.args.assign(2, ArgumentSet::psk(4));
  const auto rep = run(toy, config(true));
  const bool toy_ok = rep.k_bound == 16.0 && rep.iterations <= 16;
  report(7, k_check.over == 0 && k_check.runs > 0 && toy_ok,
         fmt("%ld runs over K out of %ld; QPSK toy K = %.0f with %ld iterations", k_check.over, k_check.runs,
             rep.k_bound, rep.iterations));
}

void criterion8() {
  const auto t0 = Clock::now();
  std::mt19937_64 g(8);
  PropertyTally sound, recovery, partition;
  check_argument_envelopes(g, 10000, sound);
  check_modulus_envelopes(g, 10000, sound);
  check_recovery(g, 10000, recovery);
  check_partition_monotonicity(g, 2000, partition);
  const double secs = seconds_since(t0);
  const long fails = sound.failures + recovery.failures + partition.failures;
  std::string first = sound.first_failure + recovery.first_failure + partition.first_failure;
  report(8, fails == 0 && secs < 10.0,
         fmt("%ld soundness/bound, %ld recovery, %ld partition samples, %ld failures%s%s, %.2f s", sound.samples,
             recovery.samples, partition.samples, fails, first.empty() ? "" : ": ", first.c_str(), secs));
}

void criterion9() {
  report(9, audit.optimal > 0 && audit.bad == 0,
         fmt("%ld optimal solutions recomputed, %ld out of tolerance, worst residual %.2e, worst eigenvalue %.2e",
             audit.optimal, audit.bad, audit.worst_res, audit.worst_eig));
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  phase_start = Clock::now();
  criterion1();
  phase_start = Clock::now();
  criterion2();
  phase_start = Clock::now();
  criterion3();
  phase_start = Clock::now();
  criterion4();
  phase_start = Clock::now();
  criterion5();
  phase_start = Clock::now();
  criterion6();
  phase_start = Clock::now();
  criterion7();
  phase_start = Clock::now();
  criterion8();
  phase_start = Clock::now();
  criterion9();
  std::printf("%d of 9 criteria failed, %.1f s total\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
