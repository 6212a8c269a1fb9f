#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cqpbb/conic_program.hpp"

namespace cqpbb {

/// Sparsity pattern of the constraint operator, regrouped per block for the
/// Schur-complement assembly M(k, l) = <A_k, E(A_l)>.
struct SchurPattern {
  struct Term {
    int i = 0;
    int j = 0;
    double v = 0.0;
  };
  // One constraint's restriction to one block. Off-diagonal symmetric entries
  // appear twice, once per triangle.
  struct RowBlock {
    int row = 0;
    std::vector<Term> terms;
  };
  struct Slot {
    int block = 0;
    int pos = 0;  // index into by_block[block]
  };

  int num_rows = 0;
  std::vector<BlockKind> kinds;
  std::vector<std::vector<RowBlock>> by_block;  // sorted by row
  std::vector<std::vector<Slot>> slots_of_row;  // sorted by block
};

SchurPattern make_schur_pattern(const ConicProgram& prog);

/// Scaling operator per block: the symmetric matrix W of E(X) = W X W for PSD
/// blocks, the column of weights w of E(x) = w .* x for Nonneg blocks.
///
/// Both routines fill the full symmetric matrix and produce bit-identical
/// results: every entry is accumulated by one thread in the same order.
Eigen::MatrixXd assemble_schur_serial(const SchurPattern& pat, const BlockValues& scaling);
Eigen::MatrixXd assemble_schur_parallel(const SchurPattern& pat, const BlockValues& scaling);

}  // namespace cqpbb
