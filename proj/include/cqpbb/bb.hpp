#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "cqpbb/conic.hpp"
#include "cqpbb/model.hpp"
#include "cqpbb/sdpsolver.hpp"

namespace cqpbb {

/// One entry of the active list: a sub-box, its relaxation solution, the
/// feasible point obtained by scaling, and the lower bound.
struct BBNode {
  SearchBox box;
  RelaxationSolution relax;
  ComplexVector scaled;
  double lower = 0.0;
  // The relaxation could not be solved even with looser tolerances; the
  // parent's solution and bound were inherited.
  bool degraded = false;
};

struct BranchScore {
  int i1 = 0;
  double s1 = 0.0;  // max_i |xhat_i - x_i|
  int i2 = 0;
  double s2 = 0.0;  // max_i X_ii - r_i^2
};

/// Projects each x_i to r_i e^{i theta}, theta the admissible angle nearest
/// to arg(x_i). Ties go to the smaller angle in [0, 2pi); a zero coordinate
/// takes the midpoint of its set.
ComplexVector scale_point(const ComplexVector& x, const std::vector<double>& r, const std::vector<ArgumentSet>& args);

/// Admissible angle nearest to theta under the tie rule of scale_point.
double nearest_angle(const ArgumentSet& a, double theta);

BranchScore branch_score(const BBNode& node);

/// Splits args[i1] when s1 >= s2, otherwise bounds[i2]. Intervals are halved
/// (both halves keep the midpoint); discrete sets are split at the midpoint
/// of their smallest and largest angle. Throws std::invalid_argument
/// ("degenerate branch") when the selected set cannot be split.
std::pair<SearchBox, SearchBox> branch(const SearchBox& box, const BranchScore& score);

/// Whether branch() would accept this selection.
bool splittable(const SearchBox& box, const BranchScore& score);

/// Worst-case iteration count K of the method for the given constants;
/// +inf when it overflows a double.
double worst_case_iterations(const ProblemCQP& p, const ComplexityConstants& k);

enum class RunStatus { EpsilonOptimal, IterationLimit, TimeLimit };

const char* to_string(RunStatus s);

struct BBLimits {
  long max_iterations = 100000;
  double time_limit_seconds = std::numeric_limits<double>::infinity();
};

struct BBProgress {
  long iteration = 0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t active = 0;
};

struct BBConfig {
  double epsilon = 1e-4;
  BBLimits limits;
  SolverConfig solver;
  /// Tolerance the root relaxations are polished toward (reported LBdE and
  /// LBdC). Zero disables polishing.
  double root_polish_tol = 1e-11;
  bool solve_csdr_root = true;
  bool parallel_children = true;
  bool verify = false;
  std::function<void(const BBProgress&)> progress;

  /// Throws std::invalid_argument on a non-positive epsilon or bad limits.
  void check() const;
};

/// One runtime check of the convergence analysis.
struct VerificationRecord {
  long iteration = 0;
  std::string check;  // "lemma1", "lemma2" or "theorem3"
  bool passed = true;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string detail;
};

struct RunReport {
  RunStatus status = RunStatus::EpsilonOptimal;
  double objective = 0.0;  // ObjVal = U*
  ComplexVector x;         // incumbent
  double final_lower = 0.0;
  double lbd_e = 0.0;  // root ECSDR bound
  double lbd_c = std::numeric_limits<double>::quiet_NaN();  // root CSDR bound (NaN if not solved)
  double cld_gap = 100.0;       // percent, clamped to [0, 100]
  double cld_gap_raw = 100.0;   // before clamping
  long iterations = 0;
  long nodes = 0;  // relaxations solved, root included
  long solver_retries = 0;
  long degraded_nodes = 0;
  bool root_tight = false;
  double k_bound = 0.0;
  ComplexityConstants constants;
  double time_total = 0.0;
  double time_e = 0.0;  // root ECSDR solve
  double time_c = 0.0;  // root CSDR solve
  std::vector<VerificationRecord> verification;

  long verification_failures() const;
};

/// Closed-gap percentage (lbd_e - lbd_c) / (objective - lbd_c) * 100, or 100
/// when objective <= lbd_c + 1e-12.
double closed_gap(double lbd_e, double lbd_c, double objective);

/// Checks of the convergence analysis for a selected node: the bound
/// F(xhat) - L <= m1 s1 + m2 s2 (+1e-6), and that the termination test
/// passes whenever a sufficient condition on the selected set holds.
std::vector<VerificationRecord> verify_iteration(const ProblemCQP& p, const BBNode& node, const BranchScore& score,
                                                 double upper, long iteration, double epsilon,
                                                 const ComplexityConstants& k);

/// Branch and bound over ECSDR relaxations, best-first on the lower bound.
/// Throws std::runtime_error if the root relaxation cannot be solved.
RunReport run(const ProblemCQP& p, const BBConfig& cfg);

}  // namespace cqpbb
