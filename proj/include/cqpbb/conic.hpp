#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cqpbb/conic_program.hpp"
#include "cqpbb/model.hpp"
#include "cqpbb/sdpsolver.hpp"

namespace cqpbb {

/// Polar-coordinate box: product of argument sets and modulus intervals.
struct SearchBox {
  std::vector<ArgumentSet> args;
  std::vector<ModulusBounds> bounds;

  static SearchBox from_problem(const ProblemCQP& p);
  int size() const { return static_cast<int>(args.size()); }
  friend bool operator==(const SearchBox&, const SearchBox&) = default;
};

enum class RelaxationKind { Csdr, Ecsdr };

/// A slack variable whose value is implied by its row once every other
/// variable is known: coef * slack = rhs - (rest of the row).
struct SlackDef {
  int row = 0;
  int block = 0;
  int index = 0;
  double coef = 0.0;
};

/// Where the relaxation variables live inside the conic program.
///
/// Coordinates whose value is forced by the box (a singleton argument with
/// equal modulus bounds, or an upper bound of zero) are substituted out; the
/// remaining ones are renumbered 0..N-2 and occupy rows 1..N-1 of the
/// bordered Hermitian matrix [[1, x^H], [x, X]], embedded as a real matrix of
/// order 2N in `big_block`.
struct RelaxationLayout {
  RelaxationKind kind = RelaxationKind::Ecsdr;
  int n = 0;
  int N = 1;
  std::vector<int> free_index;  // original coordinate of each free coordinate
  std::vector<char> is_fixed;   // per original coordinate
  ComplexVector fixed_value;    // per original coordinate (zero when free)
  int big_block = -1;           // -1 when every coordinate is fixed
  int lp_block = -1;
  std::vector<int> r_index;       // per free coordinate, ECSDR only
  std::vector<int> arrow_block;   // per free coordinate, -1 if no disk
  std::vector<int> square_block;  // per free coordinate, -1 if X_ii = r_i^2 is pinned
  std::vector<SlackDef> slacks;
};

struct RelaxationProgram {
  ConicProgram program;
  RelaxationLayout layout;
};

enum class RelaxationStatus { Optimal, Infeasible, NumericalFailure };

const char* to_string(RelaxationStatus s);

struct RelaxationSolution {
  RelaxationStatus status = RelaxationStatus::NumericalFailure;
  ComplexVector x;
  HermitianMatrix X;
  std::vector<double> r;
  double value = 0.0;
  // Solver diagnostics (zero when the solver was not needed).
  SolveStatus solver_status = SolveStatus::Optimal;
  int solver_iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double relative_gap = 0.0;
  double min_eig_z = 0.0;
  double min_eig_s = 0.0;
  bool used_solver = false;
};

/// T(H) = [[Re H, -Im H], [Im H, Re H]].
Eigen::MatrixXd embed_hermitian(const HermitianMatrix& h);

RelaxationProgram build_csdr(const ProblemCQP& p);
RelaxationProgram build_ecsdr(const ProblemCQP& p, const SearchBox& box);

/// Maps a solver result back to (x, X, r). Reports NumericalFailure if the
/// corner deviates from 1 by more than 1e-6 or the embedding symmetry is off
/// by more than 1e-5.
RelaxationSolution extract_solution(const RelaxationProgram& rp, const ConicSolution& raw);

/// Solves the program (or evaluates it directly when every coordinate is
/// fixed) and extracts the solution.
RelaxationSolution solve_relaxation(const ProblemCQP& p, const RelaxationProgram& rp, const SolverConfig& cfg);

/// max_i (r_i - |x_i|) <= tol and max_i (X_ii - r_i^2) <= tol.
bool check_tightness(const ProblemCQP& p, const RelaxationSolution& s, double tol);

/// Program variables representing (x, X, r); slacks are filled from their rows.
BlockValues lift_point(const RelaxationProgram& rp, const ComplexVector& x, const HermitianMatrix& X,
                       const std::vector<double>& r);

/// max(equality violation, largest negative cone eigenvalue).
double program_primal_violation(const ConicProgram& prog, const BlockValues& z);

}  // namespace cqpbb
