#include "cqpbb/schur.hpp"

#include <algorithm>

namespace cqpbb {

SchurPattern make_schur_pattern(const ConicProgram& prog) {
  SchurPattern pat;
  const int nb = static_cast<int>(prog.blocks.size());
  pat.num_rows = prog.num_constraints();
  pat.kinds.resize(nb);
  for (int b = 0; b < nb; ++b) pat.kinds[b] = prog.blocks[b].kind;
  pat.by_block.assign(nb, {});
  pat.slots_of_row.assign(pat.num_rows, {});

  for (int k = 0; k < pat.num_rows; ++k) {
    std::vector<std::vector<SchurPattern::Term>> per_block(nb);
    for (const auto& t : prog.constraints[k].terms) {
      per_block[t.block].push_back({t.row, t.col, t.value});
      if (t.row != t.col) per_block[t.block].push_back({t.col, t.row, t.value});
    }
    for (int b = 0; b < nb; ++b) {
      if (per_block[b].empty()) continue;
      pat.slots_of_row[k].push_back({b, static_cast<int>(pat.by_block[b].size())});
      pat.by_block[b].push_back({k, std::move(per_block[b])});
    }
  }
  return pat;
}

namespace {

double psd_term(const std::vector<SchurPattern::Term>& ak, const std::vector<SchurPattern::Term>& al,
                const Eigen::MatrixXd& w) {
  // <A_k, W A_l W> = sum a_ij c_pq W(i, p) W(q, j)
  double s = 0.0;
  for (const auto& a : ak) {
    for (const auto& c : al) s += a.v * c.v * w(a.i, c.i) * w(c.j, a.j);
  }
  return s;
}

double nonneg_term(const std::vector<SchurPattern::Term>& ak, const std::vector<SchurPattern::Term>& al,
                   const Eigen::MatrixXd& w) {
  double s = 0.0;
  for (const auto& a : ak) {
    for (const auto& c : al) {
      if (a.i == c.i) s += a.v * c.v * w(a.i, 0);
    }
  }
  return s;
}

// Upper-triangular part of row k.
void assemble_row(const SchurPattern& pat, const BlockValues& scaling, int k, Eigen::MatrixXd& m) {
  for (const auto& slot : pat.slots_of_row[k]) {
    const auto& rows = pat.by_block[slot.block];
    const auto& ak = rows[slot.pos].terms;
    const auto& w = scaling[slot.block];
    const bool psd = pat.kinds[slot.block] == BlockKind::Psd;
    for (std::size_t q = slot.pos; q < rows.size(); ++q) {
      const double v = psd ? psd_term(ak, rows[q].terms, w) : nonneg_term(ak, rows[q].terms, w);
      m(k, rows[q].row) += v;
    }
  }
}

void mirror_upper(Eigen::MatrixXd& m) {
  for (Eigen::Index k = 0; k < m.rows(); ++k)
    for (Eigen::Index l = k + 1; l < m.cols(); ++l) m(l, k) = m(k, l);
}

}  // namespace

Eigen::MatrixXd assemble_schur_serial(const SchurPattern& pat, const BlockValues& scaling) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(pat.num_rows, pat.num_rows);
  for (int k = 0; k < pat.num_rows; ++k) assemble_row(pat, scaling, k, m);
  mirror_upper(m);
  return m;
}

Eigen::MatrixXd assemble_schur_parallel(const SchurPattern& pat, const BlockValues& scaling) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(pat.num_rows, pat.num_rows);
  const int rows = pat.num_rows;
  // Rows differ widely in cost (the big block couples many constraints).
#pragma omp parallel for schedule(dynamic, 4)
  for (int k = 0; k < rows; ++k) assemble_row(pat, scaling, k, m);
  mirror_upper(m);
  return m;
}

}  // namespace cqpbb
