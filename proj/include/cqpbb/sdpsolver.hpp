#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cqpbb/conic_program.hpp"

namespace cqpbb {

struct IterationTrace {
  int iteration = 0;
  double mu = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double relative_gap = 0.0;
  double tau = 0.0;
  double kappa = 0.0;
  double step = 0.0;
};

struct ConicSolution;

struct SolverConfig {
  double feasibility_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iterations = 100;
  double step_fraction = 0.98;
  double infeasibility_tol = 1e-8;
  bool parallel_schur = false;  // OpenMP Schur-complement assembly
  /// When positive, iterate past the tolerances above toward this one and
  /// return the most accurate certified iterate found.
  double polish_tol = 0.0;
  std::function<void(const IterationTrace&)> trace;
  /// Receives every program and its returned solution. Branch and bound
  /// solves sibling nodes concurrently, so the sink must be thread-safe.
  std::function<void(const ConicProgram&, const ConicSolution&)> audit;

  /// Throws std::invalid_argument on non-positive tolerances or a step
  /// fraction outside (0, 1).
  void check() const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit, NumericalFailure };

const char* to_string(SolveStatus s);

struct ConicSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  BlockValues z;
  Eigen::VectorXd y;
  BlockValues s;
  double primal_objective = 0.0;  // <C, Z> + offset
  double dual_objective = 0.0;    // b^T y + offset
  double primal_residual = 0.0;   // max |<A_k, Z> - b_k| / (1 + max |b|)
  double dual_residual = 0.0;     // max |C - A^* y - S| / (1 + max |C|)
  double relative_gap = 0.0;      // |primal - dual| / (1 + |primal|)
  double min_eig_z = 0.0;
  double min_eig_s = 0.0;
  int iterations = 0;
  std::string message;
};

/// Residuals and cone-membership floors of (z, y, s), measured on `prog`
/// from scratch with the definitions of ConicSolution.
struct Certificate {
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double relative_gap = 0.0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double min_eig_z = 0.0;
  double min_eig_s = 0.0;
};

Certificate certify(const ConicProgram& prog, const BlockValues& z, const Eigen::VectorXd& y,
                    const BlockValues& s);

/// A nonnegative scalar fixed by a singleton equality row.
struct Elimination {
  int row = 0;
  int block = 0;
  int index = 0;
  double coef = 0.0;
  double value = 0.0;
};

struct PresolveResult {
  ConicProgram reduced;
  bool infeasible = false;
  std::string reason;
  std::vector<int> kept_rows;                 // original row of each reduced row
  std::vector<int> block_map;                 // original block -> reduced block, or -1
  std::vector<std::vector<int>> index_map;    // Nonneg blocks: original entry -> reduced entry, or -1
  std::vector<Elimination> eliminations;      // in elimination order
  int dependent_rows = 0;
};

/// Removes fixed nonnegative scalars (singleton rows) and linearly dependent
/// rows. Pivots below `rank_tol` times the largest one count as dependent.
PresolveResult preprocess(const ConicProgram& prog, double rank_tol = 1e-10);

/// Lifts a solution of `pre.reduced` back to the original program. Duals of
/// eliminating rows are chosen so that the fixed scalars have zero dual slack.
void recover(const ConicProgram& prog, const PresolveResult& pre, const BlockValues& z_red,
             const Eigen::VectorXd& y_red, const BlockValues& s_red, BlockValues& z, Eigen::VectorXd& y,
             BlockValues& s);

/// Homogeneous self-dual interior-point method with Nesterov-Todd scaling and
/// a Mehrotra predictor-corrector. The returned residuals are recomputed on
/// the original program; Optimal is reported only if they meet `cfg`.
ConicSolution solve(const ConicProgram& prog, const SolverConfig& cfg = {});

}  // namespace cqpbb
