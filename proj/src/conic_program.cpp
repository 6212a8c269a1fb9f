#include "cqpbb/conic_program.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace cqpbb {

int ConicProgram::add_block(BlockKind kind, int size) {
  if (size <= 0) throw std::invalid_argument("block size must be positive");
  blocks.push_back({kind, size});
  return static_cast<int>(blocks.size()) - 1;
}

int ConicProgram::cone_degree() const {
  int nu = 0;
  for (const auto& b : blocks) nu += b.size;
  return nu;
}

BlockValues ConicProgram::zero_values() const {
  BlockValues v;
  v.reserve(blocks.size());
  for (const auto& b : blocks) {
    if (b.kind == BlockKind::Psd)
      v.push_back(Eigen::MatrixXd::Zero(b.size, b.size));
    else
      v.push_back(Eigen::MatrixXd::Zero(b.size, 1));
  }
  return v;
}

BlockValues ConicProgram::identity_values() const {
  BlockValues v;
  v.reserve(blocks.size());
  for (const auto& b : blocks) {
    if (b.kind == BlockKind::Psd)
      v.push_back(Eigen::MatrixXd::Identity(b.size, b.size));
    else
      v.push_back(Eigen::MatrixXd::Ones(b.size, 1));
  }
  return v;
}

namespace {

void check_terms(const ConicProgram& prog, const std::vector<MatrixEntry>& terms) {
  for (const auto& t : terms) {
    if (t.block < 0 || t.block >= static_cast<int>(prog.blocks.size()))
      throw std::invalid_argument("matrix entry refers to a missing block");
    const auto& b = prog.blocks[t.block];
    if (t.row < 0 || t.col < 0 || t.row >= b.size || t.col >= b.size)
      throw std::invalid_argument("matrix entry index out of range");
    if (b.kind == BlockKind::Nonneg && t.row != t.col)
      throw std::invalid_argument("off-diagonal entry in a nonnegative block");
    if (!std::isfinite(t.value)) throw std::invalid_argument("non-finite coefficient");
  }
}

}  // namespace

void ConicProgram::check() const {
  check_terms(*this, objective);
  for (const auto& c : constraints) {
    check_terms(*this, c.terms);
    if (!std::isfinite(c.rhs)) throw std::invalid_argument("non-finite right-hand side");
  }
}

void add_functional(std::vector<MatrixEntry>& terms, int block, int i, int j, double coef) {
  if (i > j) std::swap(i, j);
  terms.push_back({block, i, j, i == j ? coef : 0.5 * coef});
}

void add_matrix_entry(std::vector<MatrixEntry>& terms, int block, int i, int j, double value) {
  if (i > j) std::swap(i, j);
  terms.push_back({block, i, j, value});
}

void canonicalize(std::vector<MatrixEntry>& terms) {
  std::sort(terms.begin(), terms.end(), [](const MatrixEntry& a, const MatrixEntry& b) {
    return std::tie(a.block, a.row, a.col) < std::tie(b.block, b.row, b.col);
  });
  std::vector<MatrixEntry> merged;
  merged.reserve(terms.size());
  for (const auto& t : terms) {
    if (!merged.empty() && merged.back().block == t.block && merged.back().row == t.row &&
        merged.back().col == t.col) {
      merged.back().value += t.value;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const MatrixEntry& t) { return t.value == 0.0; });
  terms = std::move(merged);
}

double inner(const std::vector<MatrixEntry>& terms, const BlockValues& z) {
  double s = 0.0;
  for (const auto& t : terms) {
    const auto& m = z[t.block];
    if (m.cols() == 1 && m.rows() > 1)
      s += t.value * m(t.row, 0);
    else if (t.row == t.col)
      s += t.value * m(t.row, t.col);
    else
      s += t.value * (m(t.row, t.col) + m(t.col, t.row));
  }
  return s;
}

void accumulate(const std::vector<MatrixEntry>& terms, double scale, BlockValues& out) {
  for (const auto& t : terms) {
    auto& m = out[t.block];
    if (m.cols() == 1 && m.rows() > 1) {
      m(t.row, 0) += scale * t.value;
    } else {
      m(t.row, t.col) += scale * t.value;
      if (t.row != t.col) m(t.col, t.row) += scale * t.value;
    }
  }
}

double block_inner(const BlockValues& x, const BlockValues& y) {
  double s = 0.0;
  for (std::size_t b = 0; b < x.size(); ++b) s += x[b].cwiseProduct(y[b]).sum();
  return s;
}

double block_norm(const BlockValues& x) { return std::sqrt(block_inner(x, x)); }

double equality_violation(const ConicProgram& prog, const BlockValues& z) {
  double worst = 0.0;
  for (const auto& c : prog.constraints) worst = std::max(worst, std::abs(inner(c.terms, z) - c.rhs));
  return worst;
}

double min_cone_eigenvalue(const ConicProgram& prog, const BlockValues& z) {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < prog.blocks.size(); ++b) {
    if (prog.blocks[b].kind == BlockKind::Nonneg) {
      lo = std::min(lo, z[b].minCoeff());
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(z[b], Eigen::EigenvaluesOnly);
      lo = std::min(lo, es.eigenvalues().minCoeff());
    }
  }
  return lo;
}

}  // namespace cqpbb
