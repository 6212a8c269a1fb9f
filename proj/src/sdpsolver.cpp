#include "cqpbb/sdpsolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <tuple>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "cqpbb/schur.hpp"

namespace cqpbb {

void SolverConfig::check() const {
  if (!(feasibility_tol > 0.0) || !(gap_tol > 0.0) || !(infeasibility_tol > 0.0))
    throw std::invalid_argument("solver tolerances must be positive");
  if (!(step_fraction > 0.0 && step_fraction < 1.0))
    throw std::invalid_argument("step fraction must lie in (0, 1)");
  if (!(polish_tol >= 0.0)) throw std::invalid_argument("polish tolerance must be nonnegative");
  if (max_iterations < 0) throw std::invalid_argument("max_iterations must be nonnegative");
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::IterationLimit: return "iteration-limit";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

namespace {

double max_abs(const BlockValues& v) {
  double m = 0.0;
  for (const auto& b : v)
    if (b.size() > 0) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

double max_abs(const Eigen::VectorXd& v) { return v.size() > 0 ? v.cwiseAbs().maxCoeff() : 0.0; }

BlockValues objective_values(const ConicProgram& p) {
  BlockValues c = p.zero_values();
  accumulate(p.objective, 1.0, c);
  return c;
}

Eigen::VectorXd rhs_vector(const ConicProgram& p) {
  Eigen::VectorXd b(p.num_constraints());
  for (int k = 0; k < p.num_constraints(); ++k) b[k] = p.constraints[k].rhs;
  return b;
}

Eigen::VectorXd apply_a(const ConicProgram& p, const BlockValues& z) {
  Eigen::VectorXd v(p.num_constraints());
  for (int k = 0; k < p.num_constraints(); ++k) v[k] = inner(p.constraints[k].terms, z);
  return v;
}

BlockValues apply_at(const ConicProgram& p, const Eigen::VectorXd& y) {
  BlockValues out = p.zero_values();
  for (int k = 0; k < p.num_constraints(); ++k) accumulate(p.constraints[k].terms, y[k], out);
  return out;
}

void axpy(double a, const BlockValues& x, BlockValues& y) {
  for (std::size_t b = 0; b < x.size(); ++b) y[b] += a * x[b];
}

BlockValues scaled(const BlockValues& x, double a) {
  BlockValues out = x;
  for (auto& b : out) b *= a;
  return out;
}

}  // namespace

Certificate certify(const ConicProgram& prog, const BlockValues& z, const Eigen::VectorXd& y,
                    const BlockValues& s) {
  Certificate c;
  const BlockValues cmat = objective_values(prog);
  const Eigen::VectorXd b = rhs_vector(prog);
  const double bmax = max_abs(b);
  const double cmax = max_abs(cmat);

  c.primal_residual = max_abs(Eigen::VectorXd(apply_a(prog, z) - b)) / (1.0 + bmax);

  BlockValues r = cmat;
  axpy(-1.0, apply_at(prog, y), r);
  axpy(-1.0, s, r);
  c.dual_residual = max_abs(r) / (1.0 + cmax);

  c.primal_objective = block_inner(cmat, z) + prog.objective_offset;
  c.dual_objective = (b.size() > 0 ? b.dot(y) : 0.0) + prog.objective_offset;
  c.relative_gap = std::abs(c.primal_objective - c.dual_objective) / (1.0 + std::abs(c.primal_objective));
  c.min_eig_z = min_cone_eigenvalue(prog, z);
  c.min_eig_s = min_cone_eigenvalue(prog, s);
  return c;
}

// ---------------------------------------------------------------------------
// Presolve

PresolveResult preprocess(const ConicProgram& prog, double rank_tol) {
  prog.check();
  PresolveResult pre;
  const int nb = static_cast<int>(prog.blocks.size());
  const int m = prog.num_constraints();

  std::vector<std::vector<MatrixEntry>> rows(m);
  std::vector<double> rhs(m);
  double bmax = 0.0;
  for (int k = 0; k < m; ++k) {
    rows[k] = prog.constraints[k].terms;
    canonicalize(rows[k]);
    rhs[k] = prog.constraints[k].rhs;
    bmax = std::max(bmax, std::abs(rhs[k]));
  }
  const double feas_tol = 1e-9 * (1.0 + bmax);

  std::vector<std::vector<char>> fixed(nb);
  std::vector<std::vector<double>> fixed_value(nb);
  for (int b = 0; b < nb; ++b) {
    if (prog.blocks[b].kind == BlockKind::Nonneg) {
      fixed[b].assign(prog.blocks[b].size, 0);
      fixed_value[b].assign(prog.blocks[b].size, 0.0);
    }
  }
  auto is_fixed = [&](const MatrixEntry& t) {
    return prog.blocks[t.block].kind == BlockKind::Nonneg && fixed[t.block][t.row];
  };

  std::vector<char> active(m, 1);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int k = 0; k < m; ++k) {
      if (!active[k]) continue;
      auto& r = rows[k];
      for (const auto& t : r)
        if (is_fixed(t)) rhs[k] -= t.value * fixed_value[t.block][t.row];
      std::erase_if(r, is_fixed);

      if (r.empty()) {
        if (std::abs(rhs[k]) > feas_tol) {
          pre.infeasible = true;
          pre.reason = "inconsistent equality row " + std::to_string(k);
          return pre;
        }
        active[k] = 0;
        continue;
      }
      if (r.size() == 1 && prog.blocks[r[0].block].kind == BlockKind::Nonneg) {
        const auto t = r[0];
        double v = rhs[k] / t.value;
        if (v < -feas_tol) {
          pre.infeasible = true;
          pre.reason = "row " + std::to_string(k) + " fixes a nonnegative scalar at " + std::to_string(v);
          return pre;
        }
        v = std::max(v, 0.0);
        fixed[t.block][t.row] = 1;
        fixed_value[t.block][t.row] = v;
        pre.eliminations.push_back({k, t.block, t.row, t.value, v});
        active[k] = 0;
        changed = true;
      }
    }
  }

  // Reduced block structure.
  auto& red = pre.reduced;
  pre.block_map.assign(nb, -1);
  pre.index_map.assign(nb, {});
  for (int b = 0; b < nb; ++b) {
    const auto& spec = prog.blocks[b];
    if (spec.kind == BlockKind::Psd) {
      pre.block_map[b] = red.add_block(BlockKind::Psd, spec.size);
      continue;
    }
    auto& map = pre.index_map[b];
    map.assign(spec.size, -1);
    int count = 0;
    for (int j = 0; j < spec.size; ++j)
      if (!fixed[b][j]) map[j] = count++;
    if (count > 0) pre.block_map[b] = red.add_block(BlockKind::Nonneg, count);
  }
  auto remap = [&](const MatrixEntry& t) {
    MatrixEntry u = t;
    u.block = pre.block_map[t.block];
    if (prog.blocks[t.block].kind == BlockKind::Nonneg) u.row = u.col = pre.index_map[t.block][t.row];
    return u;
  };

  red.objective_offset = prog.objective_offset;
  for (const auto& t : prog.objective) {
    if (is_fixed(t))
      red.objective_offset += t.value * fixed_value[t.block][t.row];
    else
      red.objective.push_back(remap(t));
  }
  canonicalize(red.objective);

  // Rank filtering on the surviving rows. Rows are vectorized so that the
  // Euclidean inner product equals the Frobenius one.
  std::vector<int> cand;
  for (int k = 0; k < m; ++k)
    if (active[k]) cand.push_back(k);

  std::map<std::tuple<int, int, int>, int> column;
  for (int k : cand)
    for (const auto& t : rows[k]) column.try_emplace({t.block, t.row, t.col}, static_cast<int>(column.size()));

  const int nc = static_cast<int>(cand.size());
  std::vector<int> selected;
  if (nc > 0) {
    Eigen::MatrixXd vt = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(column.size()), nc);
    Eigen::VectorXd bc(nc);
    for (int q = 0; q < nc; ++q) {
      const int k = cand[q];
      bc[q] = rhs[k];
      for (const auto& t : rows[k]) {
        const double w = (t.row == t.col) ? 1.0 : std::sqrt(2.0);
        vt(column.at({t.block, t.row, t.col}), q) = w * t.value;
      }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vt);
    qr.setThreshold(rank_tol);
    const int rank = static_cast<int>(qr.rank());
    const auto& perm = qr.colsPermutation().indices();
    std::vector<int> sel_q(perm.data(), perm.data() + rank);
    std::sort(sel_q.begin(), sel_q.end());

    if (rank < nc) {
      Eigen::MatrixXd basis(vt.rows(), rank);
      Eigen::VectorXd bsel(rank);
      for (int i = 0; i < rank; ++i) {
        basis.col(i) = vt.col(sel_q[i]);
        bsel[i] = bc[sel_q[i]];
      }
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> bqr(basis);
      std::vector<char> in_sel(nc, 0);
      for (int q : sel_q) in_sel[q] = 1;
      for (int q = 0; q < nc; ++q) {
        if (in_sel[q]) continue;
        const Eigen::VectorXd coef = bqr.solve(Eigen::VectorXd(vt.col(q)));
        const double implied = coef.dot(bsel);
        const double scale = 1.0 + std::abs(bc[q]) + coef.cwiseAbs().dot(bsel.cwiseAbs());
        if (std::abs(implied - bc[q]) > 1e-8 * scale) {
          pre.infeasible = true;
          pre.reason = "inconsistent dependent equality row " + std::to_string(cand[q]);
          return pre;
        }
        ++pre.dependent_rows;
      }
    }
    for (int q : sel_q) selected.push_back(cand[q]);
  }

  for (int k : selected) {
    LinearConstraint c;
    c.rhs = rhs[k];
    for (const auto& t : rows[k]) c.terms.push_back(remap(t));
    canonicalize(c.terms);
    red.constraints.push_back(std::move(c));
    pre.kept_rows.push_back(k);
  }
  return pre;
}

void recover(const ConicProgram& prog, const PresolveResult& pre, const BlockValues& z_red,
             const Eigen::VectorXd& y_red, const BlockValues& s_red, BlockValues& z, Eigen::VectorXd& y,
             BlockValues& s) {
  z = prog.zero_values();
  s = prog.zero_values();
  y = Eigen::VectorXd::Zero(prog.num_constraints());
  for (std::size_t b = 0; b < prog.blocks.size(); ++b) {
    const int rb = pre.block_map[b];
    if (rb < 0) continue;
    if (prog.blocks[b].kind == BlockKind::Psd) {
      z[b] = z_red[rb];
      s[b] = s_red[rb];
      continue;
    }
    const auto& map = pre.index_map[b];
    for (std::size_t j = 0; j < map.size(); ++j) {
      if (map[j] < 0) continue;
      z[b](j, 0) = z_red[rb](map[j], 0);
      s[b](j, 0) = s_red[rb](map[j], 0);
    }
  }
  for (const auto& e : pre.eliminations) z[e.block](e.index, 0) = e.value;
  for (std::size_t i = 0; i < pre.kept_rows.size(); ++i) y[pre.kept_rows[i]] = y_red[i];

  const BlockValues cmat = objective_values(prog);
  BlockValues aty = apply_at(prog, y);
  for (auto it = pre.eliminations.rbegin(); it != pre.eliminations.rend(); ++it) {
    const double yk = (cmat[it->block](it->index, 0) - aty[it->block](it->index, 0)) / it->coef;
    y[it->row] = yk;
    accumulate(prog.constraints[it->row].terms, yk, aty);
  }
  for (const auto& e : pre.eliminations)
    s[e.block](e.index, 0) = cmat[e.block](e.index, 0) - aty[e.block](e.index, 0);
}

// ---------------------------------------------------------------------------
// Interior-point method

namespace {

struct BlockScaling {
  bool psd = true;
  Eigen::MatrixXd lz;    // chol(Z), PSD
  Eigen::MatrixXd ls;    // chol(S), PSD
  Eigen::MatrixXd g;     // W = G G^T, Z = G L G^T, S = G^-T L G^-1; Nonneg: column sqrt(z/s)
  Eigen::MatrixXd ginv;  // PSD only
  Eigen::MatrixXd w;     // Schur weights: W (PSD) or g.^2 (Nonneg)
  Eigen::VectorXd lambda;
};

struct Direction {
  BlockValues dz;
  BlockValues ds;
  Eigen::VectorXd dy;
  double dtau = 0.0;
  double dkappa = 0.0;
};

bool compute_scaling(const BlockValues& z, const BlockValues& s, const ConicProgram& p,
                     std::vector<BlockScaling>& out) {
  out.resize(p.blocks.size());
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    auto& sc = out[b];
    if (p.blocks[b].kind == BlockKind::Nonneg) {
      sc.psd = false;
      if ((z[b].array() <= 0.0).any() || (s[b].array() <= 0.0).any()) return false;
      sc.g = (z[b].array() / s[b].array()).sqrt().matrix();
      sc.lambda = (z[b].array() * s[b].array()).sqrt().matrix();
      sc.w = sc.g.array().square().matrix();
      continue;
    }
    sc.psd = true;
    Eigen::LLT<Eigen::MatrixXd> lz(z[b]);
    Eigen::LLT<Eigen::MatrixXd> ls(s[b]);
    if (lz.info() != Eigen::Success || ls.info() != Eigen::Success) return false;
    sc.lz = lz.matrixL();
    sc.ls = ls.matrixL();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sc.ls.transpose() * sc.lz, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd d = svd.singularValues();
    if (!(d.minCoeff() > 0.0) || !d.allFinite()) return false;
    const Eigen::MatrixXd& v = svd.matrixV();
    const Eigen::VectorXd dm = d.array().rsqrt().matrix();
    const Eigen::VectorXd dp = d.array().sqrt().matrix();
    sc.g = sc.lz * v * dm.asDiagonal();
    const Eigen::MatrixXd lzinv =
        sc.lz.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(sc.lz.rows(), sc.lz.cols()));
    sc.ginv = dp.asDiagonal() * v.transpose() * lzinv;
    sc.w = sc.g * sc.g.transpose();
    sc.w = 0.5 * (sc.w + sc.w.transpose()).eval();
    sc.lambda = d;
  }
  return true;
}

BlockValues apply_e(const std::vector<BlockScaling>& sc, const BlockValues& x) {
  BlockValues out(x.size());
  for (std::size_t b = 0; b < x.size(); ++b) {
    if (sc[b].psd) {
      out[b] = sc[b].w * x[b] * sc[b].w;
      out[b] = 0.5 * (out[b] + out[b].transpose()).eval();
    } else {
      out[b] = sc[b].w.cwiseProduct(x[b]);
    }
  }
  return out;
}

// Largest alpha with v + alpha dv in the cone (infinity if unbounded).
double max_step_block(const BlockScaling& sc, const Eigen::MatrixXd& v, const Eigen::MatrixXd& dv, bool primal) {
  const double inf = std::numeric_limits<double>::infinity();
  if (!sc.psd) {
    double a = inf;
    for (Eigen::Index j = 0; j < v.rows(); ++j)
      if (dv(j, 0) < 0.0) a = std::min(a, -v(j, 0) / dv(j, 0));
    return a;
  }
  const Eigen::MatrixXd& l = primal ? sc.lz : sc.ls;
  Eigen::MatrixXd t = l.triangularView<Eigen::Lower>().solve(dv);
  t = l.triangularView<Eigen::Lower>().solve(t.transpose().eval());
  t = 0.5 * (t + t.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  return lmin < 0.0 ? -1.0 / lmin : inf;
}

class Ipm {
 public:
  Ipm(const ConicProgram& red, const SolverConfig& cfg) : red_(red), cfg_(cfg) {
    m_ = red.num_constraints();
    nu_ = red.cone_degree();
    b_ = rhs_vector(red);
    c_ = objective_values(red);
    bmax_ = max_abs(b_);
    cmax_ = max_abs(c_);
    sb_ = std::max(1.0, bmax_);
    sc_ = std::max(1.0, cmax_);
    b_ /= sb_;
    for (auto& blk : c_) blk /= sc_;
    pattern_ = make_schur_pattern(red);
  }

  ConicSolution run(const PresolveResult& pre, const ConicProgram& prog);

 private:
  // Normalized, unscaled iterate of the reduced program.
  void current(BlockValues& z, Eigen::VectorXd& y, BlockValues& s) const {
    z = scaled(z_, sb_ / tau_);
    s = scaled(s_, sc_ / tau_);
    y = y_ * (sc_ / tau_);
  }

  bool factor_schur();
  Eigen::VectorXd solve_schur(const Eigen::VectorXd& r) const;
  Direction newton(const Eigen::VectorXd& p1, const BlockValues& p2, double p3, const BlockValues& rc,
                   double rtk) const;
  Direction direction(double eta, double target, const BlockValues* corr, double corr_tk) const;
  double max_step(const Direction& d) const;

  const ConicProgram& red_;
  const SolverConfig& cfg_;
  int m_ = 0;
  int nu_ = 0;
  Eigen::VectorXd b_;
  BlockValues c_;
  double bmax_ = 0.0, cmax_ = 0.0, sb_ = 1.0, sc_ = 1.0;
  SchurPattern pattern_;

  BlockValues z_, s_;
  Eigen::VectorXd y_;
  double tau_ = 1.0, kappa_ = 1.0;

  // Per-iteration data.
  std::vector<BlockScaling> scal_;
  Eigen::MatrixXd schur_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd r1_;
  BlockValues r2_;
  double r3_ = 0.0;
  Eigen::VectorXd u_, w_;  // M^-1 A E C, M^-1 b
  BlockValues q_, eq_, qw_;  // C - A^* u, E q, q - A^* w
  double qeq_ = 0.0, bw_ = 0.0;
};

bool Ipm::factor_schur() {
  if (m_ == 0) return true;
  BlockValues w(scal_.size());
  for (std::size_t b = 0; b < scal_.size(); ++b) w[b] = scal_[b].w;
  schur_ = cfg_.parallel_schur ? assemble_schur_parallel(pattern_, w) : assemble_schur_serial(pattern_, w);
  llt_.compute(schur_);
  if (llt_.info() == Eigen::Success) return true;
  const double scale = std::max(1.0, schur_.diagonal().cwiseAbs().maxCoeff());
  for (double delta = 1e-14; delta <= 1e-6; delta *= 100.0) {
    Eigen::MatrixXd reg = schur_;
    reg.diagonal().array() += delta * scale;
    llt_.compute(reg);
    if (llt_.info() == Eigen::Success) return true;
  }
  return false;
}

Eigen::VectorXd Ipm::solve_schur(const Eigen::VectorXd& r) const {
  if (m_ == 0) return Eigen::VectorXd::Zero(0);
  Eigen::VectorXd x = llt_.solve(r);
  for (int k = 0; k < 3; ++k) x += llt_.solve(r - schur_ * x);  // iterative refinement
  return x;
}

Direction Ipm::newton(const Eigen::VectorXd& p1, const BlockValues& p2, double p3, const BlockValues& rc,
                      double rtk) const {
  // Eliminating dZ and dS leaves M dy = p1 + A E p2 - A rc + (A E C + b) dtau.
  // The dtau equation is written with q = C - A^* M^-1 A E C so that its
  // large terms cancel analytically rather than in floating point.
  const BlockValues ep2 = apply_e(scal_, p2);
  const Eigen::VectorXd y2 = solve_schur(p1 + apply_a(red_, ep2) - apply_a(red_, rc));
  const double num =
      p3 - u_.dot(p1) + block_inner(eq_, p2) - block_inner(q_, rc) + b_.dot(y2) - rtk / tau_;
  const double den = -qeq_ - bw_ - kappa_ / tau_;

  Direction d;
  d.dtau = num / den;
  d.dy = y2 + d.dtau * (u_ + w_);
  d.ds = p2;
  axpy(-1.0, apply_at(red_, y2), d.ds);
  axpy(d.dtau, qw_, d.ds);
  d.dz = rc;
  axpy(-1.0, apply_e(scal_, d.ds), d.dz);
  for (std::size_t b = 0; b < scal_.size(); ++b) {
    if (scal_[b].psd) {
      d.dz[b] = 0.5 * (d.dz[b] + d.dz[b].transpose()).eval();
      d.ds[b] = 0.5 * (d.ds[b] + d.ds[b].transpose()).eval();
    }
  }
  d.dkappa = (rtk - kappa_ * d.dtau) / tau_;
  return d;
}

Direction Ipm::direction(double eta, double target, const BlockValues* corr, double corr_tk) const {
  const std::size_t nb = scal_.size();
  BlockValues rc(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const auto& sc = scal_[b];
    const Eigen::VectorXd& lam = sc.lambda;
    const Eigen::Index n = lam.size();
    if (sc.psd) {
      Eigen::MatrixXd t(n, n);
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
          double num = (i == j) ? target - lam[i] * lam[i] : 0.0;
          if (corr) num -= (*corr)[b](i, j);
          t(i, j) = 2.0 * num / (lam[i] + lam[j]);
        }
      }
      rc[b] = sc.g * t * sc.g.transpose();
      rc[b] = 0.5 * (rc[b] + rc[b].transpose()).eval();
    } else {
      rc[b].resize(n, 1);
      for (Eigen::Index j = 0; j < n; ++j) {
        double num = target - lam[j] * lam[j];
        if (corr) num -= (*corr)[b](j, 0);
        rc[b](j, 0) = sc.g(j, 0) * num / lam[j];
      }
    }
  }
  const double rtk = target - tau_ * kappa_ - corr_tk;
  const Eigen::VectorXd p1 = -eta * r1_;
  const BlockValues p2 = scaled(r2_, -eta);
  const double p3 = -eta * r3_;

  Direction d = newton(p1, p2, p3, rc, rtk);

  // Residuals of the feasibility rows of the linearized system; the
  // complementarity row holds by construction of dz.
  struct Residual {
    Eigen::VectorXd e1;
    BlockValues e2, e4;
    double e3 = 0.0, e5 = 0.0, size = 0.0;
  };
  auto residual = [&](const Direction& t) {
    Residual r;
    r.e1 = p1 - apply_a(red_, t.dz) + t.dtau * b_;
    r.e2 = p2;
    axpy(-1.0, apply_at(red_, t.dy), r.e2);
    axpy(-1.0, t.ds, r.e2);
    axpy(t.dtau, c_, r.e2);
    r.e3 = p3 + b_.dot(t.dy) - block_inner(c_, t.dz) - t.dkappa;
    r.e4 = rc;
    axpy(-1.0, t.dz, r.e4);
    axpy(-1.0, apply_e(scal_, t.ds), r.e4);
    r.e5 = rtk - kappa_ * t.dtau - tau_ * t.dkappa;
    r.size = std::max({max_abs(r.e1), max_abs(r.e2), std::abs(r.e3)});
    return r;
  };

  // Iterative refinement on the full system, kept only while it helps: near
  // the optimum W is badly conditioned and a correction can add more error
  // than it removes.
  Residual res = residual(d);
  for (int pass = 0; pass < 2 && res.size > 0.0; ++pass) {
    const Direction c = newton(res.e1, res.e2, res.e3, res.e4, res.e5);
    Direction t = d;
    axpy(1.0, c.dz, t.dz);
    axpy(1.0, c.ds, t.ds);
    t.dy += c.dy;
    t.dtau += c.dtau;
    t.dkappa += c.dkappa;
    Residual tr = residual(t);
    if (!(tr.size < res.size)) break;
    d = std::move(t);
    res = std::move(tr);
  }
  return d;
}

double Ipm::max_step(const Direction& d) const {
  double a = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < scal_.size(); ++b) {
    a = std::min(a, max_step_block(scal_[b], z_[b], d.dz[b], true));
    a = std::min(a, max_step_block(scal_[b], s_[b], d.ds[b], false));
  }
  if (d.dtau < 0.0) a = std::min(a, -tau_ / d.dtau);
  if (d.dkappa < 0.0) a = std::min(a, -kappa_ / d.dkappa);
  return a;
}

ConicSolution Ipm::run(const PresolveResult& pre, const ConicProgram& prog) {
  ConicSolution out;
  z_ = red_.identity_values();
  s_ = red_.identity_values();
  y_ = Eigen::VectorXd::Zero(m_);
  tau_ = kappa_ = 1.0;

  auto finish = [&](SolveStatus status, int iters, std::string msg) {
    BlockValues zr, sr;
    Eigen::VectorXd yr;
    current(zr, yr, sr);
    recover(prog, pre, zr, yr, sr, out.z, out.y, out.s);
    const Certificate c = certify(prog, out.z, out.y, out.s);
    out.status = status;
    out.iterations = iters;
    out.message = std::move(msg);
    out.primal_objective = c.primal_objective;
    out.dual_objective = c.dual_objective;
    out.primal_residual = c.primal_residual;
    out.dual_residual = c.dual_residual;
    out.relative_gap = c.relative_gap;
    out.min_eig_z = c.min_eig_z;
    out.min_eig_s = c.min_eig_s;
    return c;
  };

  // Polishing: once the tolerances are met, keep the best certified iterate
  // and return it if the extra iterations stall.
  constexpr int kMaxPolishSteps = 6;
  std::optional<ConicSolution> best;
  double best_err = 0.0;
  int polish_steps = 0;
  auto fail = [&](SolveStatus status, int iters, std::string msg) {
    if (best) return *best;
    finish(status, iters, std::move(msg));
    return out;
  };

  for (int it = 0;; ++it) {
    r1_ = apply_a(red_, z_) - tau_ * b_;
    const BlockValues aty = apply_at(red_, y_);
    r2_ = aty;
    axpy(1.0, s_, r2_);
    axpy(-tau_, c_, r2_);
    const double by = b_.dot(y_);
    const double cz = block_inner(c_, z_);
    r3_ = -by + cz + kappa_;
    const double mu = (block_inner(z_, s_) + tau_ * kappa_) / (nu_ + 1);

    // Convergence measured on the unscaled normalized iterate.
    const double pres = max_abs(Eigen::VectorXd(r1_ / tau_)) * sb_ / (1.0 + bmax_);
    const double dres = max_abs(r2_) / tau_ * sc_ / (1.0 + cmax_);
    const double pobj = cz / tau_ * sb_ * sc_ + red_.objective_offset;
    const double dobj = by / tau_ * sb_ * sc_ + red_.objective_offset;
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
    if (cfg_.trace) cfg_.trace({it, mu, pres, dres, gap, tau_, kappa_, 0.0});

    if (pres <= cfg_.feasibility_tol && dres <= cfg_.feasibility_tol && gap <= cfg_.gap_tol) {
      ConicSolution saved = out;
      const Certificate c = finish(SolveStatus::Optimal, it, "");
      if (c.primal_residual <= cfg_.feasibility_tol && c.dual_residual <= cfg_.feasibility_tol &&
          c.relative_gap <= cfg_.gap_tol) {
        const double err = std::max({c.primal_residual, c.dual_residual, c.relative_gap});
        if (cfg_.polish_tol <= 0.0 || err <= cfg_.polish_tol) return out;
        if (!best || err < best_err) {
          best = out;
          best_err = err;
        }
        if (++polish_steps > kMaxPolishSteps) return *best;
      }
      out = saved;
    }

    // Certificates of infeasibility from the homogeneous embedding.
    if (by > 0.0) {
      BlockValues ray = aty;
      axpy(1.0, s_, ray);
      if (max_abs(ray) / by <= cfg_.infeasibility_tol) {
        return fail(SolveStatus::Infeasible, it, "primal infeasibility certificate");
      }
    }
    if (cz < 0.0 && max_abs(apply_a(red_, z_)) / -cz <= cfg_.infeasibility_tol) {
      return fail(SolveStatus::Unbounded, it, "dual infeasibility certificate");
    }
    if (it >= cfg_.max_iterations) {
      return fail(SolveStatus::IterationLimit, it, "iteration limit reached");
    }

    if (!compute_scaling(z_, s_, red_, scal_)) {
      return fail(SolveStatus::NumericalFailure, it, "iterate left the cone interior");
    }
    if (!factor_schur()) {
      return fail(SolveStatus::NumericalFailure, it, "Schur complement singular after regularization");
    }
    u_ = solve_schur(apply_a(red_, apply_e(scal_, c_)));
    w_ = solve_schur(b_);
    q_ = c_;
    axpy(-1.0, apply_at(red_, u_), q_);
    eq_ = apply_e(scal_, q_);
    qw_ = q_;
    axpy(-1.0, apply_at(red_, w_), qw_);
    qeq_ = block_inner(q_, eq_);
    bw_ = b_.dot(w_);

    // Predictor.
    const Direction aff = direction(1.0, 0.0, nullptr, 0.0);
    const double a_aff = std::min(1.0, max_step(aff));
    BlockValues zt = z_, st = s_;
    axpy(a_aff, aff.dz, zt);
    axpy(a_aff, aff.ds, st);
    const double mu_aff =
        (block_inner(zt, st) + (tau_ + a_aff * aff.dtau) * (kappa_ + a_aff * aff.dkappa)) / (nu_ + 1);
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    // Second-order term in the scaled space.
    BlockValues corr(scal_.size());
    for (std::size_t b = 0; b < scal_.size(); ++b) {
      const auto& sc = scal_[b];
      if (sc.psd) {
        const Eigen::MatrixXd dzt = sc.ginv * aff.dz[b] * sc.ginv.transpose();
        const Eigen::MatrixXd dst = sc.g.transpose() * aff.ds[b] * sc.g;
        corr[b] = 0.5 * (dzt * dst + dst * dzt);
      } else {
        corr[b] = aff.dz[b].cwiseProduct(aff.ds[b]);
      }
    }
    const Direction d = direction(1.0 - sigma, sigma * mu, &corr, aff.dtau * aff.dkappa);
    const double alpha = std::min(1.0, cfg_.step_fraction * max_step(d));
    if (!(alpha > 1e-12) || !std::isfinite(alpha)) {
      return fail(SolveStatus::NumericalFailure, it, "step length collapsed");
    }

    axpy(alpha, d.dz, z_);
    axpy(alpha, d.ds, s_);
    y_ += alpha * d.dy;
    tau_ += alpha * d.dtau;
    kappa_ += alpha * d.dkappa;
    if (cfg_.trace) cfg_.trace({it + 1, mu, pres, dres, gap, tau_, kappa_, alpha});
  }
}

}  // namespace

namespace {

ConicSolution solve_checked(const ConicProgram& prog, const SolverConfig& cfg) {
  const PresolveResult pre = preprocess(prog);
  if (pre.infeasible) {
    ConicSolution out;
    out.status = SolveStatus::Infeasible;
    out.message = pre.reason;
    out.z = prog.zero_values();
    out.s = prog.zero_values();
    out.y = Eigen::VectorXd::Zero(prog.num_constraints());
    return out;
  }
  if (pre.reduced.blocks.empty()) {
    // Every variable was fixed by presolve.
    ConicSolution out;
    recover(prog, pre, {}, Eigen::VectorXd::Zero(pre.reduced.num_constraints()), {}, out.z, out.y, out.s);
    const Certificate c = certify(prog, out.z, out.y, out.s);
    out.status = SolveStatus::Optimal;
    out.primal_objective = c.primal_objective;
    out.dual_objective = c.dual_objective;
    out.primal_residual = c.primal_residual;
    out.dual_residual = c.dual_residual;
    out.relative_gap = c.relative_gap;
    out.min_eig_z = c.min_eig_z;
    out.min_eig_s = c.min_eig_s;
    return out;
  }
  Ipm ipm(pre.reduced, cfg);
  return ipm.run(pre, prog);
}

}  // namespace

ConicSolution solve(const ConicProgram& prog, const SolverConfig& cfg) {
  cfg.check();
  ConicSolution out = solve_checked(prog, cfg);
  if (cfg.audit) cfg.audit(prog, out);
  return out;
}

}  // namespace cqpbb
