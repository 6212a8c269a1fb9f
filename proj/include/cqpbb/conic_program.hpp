#pragma once

#include <vector>

#include <Eigen/Dense>

namespace cqpbb {

enum class BlockKind {
  Psd,     // symmetric positive semidefinite matrix of order `size`
  Nonneg,  // `size` independent nonnegative scalars
};

struct BlockSpec {
  BlockKind kind = BlockKind::Psd;
  int size = 0;
};

/// One entry of a symmetric coefficient matrix: A(row, col) = A(col, row) = value.
/// Stored with row <= col. For Nonneg blocks row == col is the scalar index.
struct MatrixEntry {
  int block = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// <A, Z> = rhs, with A block diagonal.
struct LinearConstraint {
  std::vector<MatrixEntry> terms;
  double rhs = 0.0;
};

/// Block values, one dense matrix per block. Nonneg blocks are stored as
/// column vectors of length `size`.
using BlockValues = std::vector<Eigen::MatrixXd>;

/// Standard-form conic program
///
///   min  <C, Z> + offset   s.t.  <A_k, Z> = b_k,  Z in K,
///
/// where K is a product of PSD and nonnegative-orthant blocks. Its dual is
///
///   max  b^T y + offset    s.t.  C - sum_k y_k A_k = S,  S in K.
struct ConicProgram {
  std::vector<BlockSpec> blocks;
  std::vector<MatrixEntry> objective;
  std::vector<LinearConstraint> constraints;
  double objective_offset = 0.0;

  int add_block(BlockKind kind, int size);
  int num_constraints() const { return static_cast<int>(constraints.size()); }
  /// Sum of block orders (the barrier parameter of the cone).
  int cone_degree() const;

  BlockValues zero_values() const;
  BlockValues identity_values() const;

  /// Structural checks: indices in range, Nonneg entries diagonal.
  /// Throws std::invalid_argument.
  void check() const;
};

/// Appends `coef * Z(i, j)` to a linear functional. Off-diagonal coefficients
/// are halved so that the symmetric matrix reproduces the functional.
void add_functional(std::vector<MatrixEntry>& terms, int block, int i, int j, double coef);

/// Appends the symmetric matrix entry A(i, j) = A(j, i) += value.
void add_matrix_entry(std::vector<MatrixEntry>& terms, int block, int i, int j, double value);

/// Sorts by (block, row, col) and merges duplicates; drops exact zeros.
void canonicalize(std::vector<MatrixEntry>& terms);

/// <A, Z> for the symmetric matrix described by `terms`.
double inner(const std::vector<MatrixEntry>& terms, const BlockValues& z);

/// Adds scale * A to `out` (both triangles of PSD blocks).
void accumulate(const std::vector<MatrixEntry>& terms, double scale, BlockValues& out);

/// Sum over blocks of <X_b, Y_b>.
double block_inner(const BlockValues& x, const BlockValues& y);
double block_norm(const BlockValues& x);

/// Max |<A_k, Z> - b_k|.
double equality_violation(const ConicProgram& prog, const BlockValues& z);

/// Smallest eigenvalue (PSD) or entry (Nonneg) over all blocks.
double min_cone_eigenvalue(const ConicProgram& prog, const BlockValues& z);

}  // namespace cqpbb
