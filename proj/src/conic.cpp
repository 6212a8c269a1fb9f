#include "cqpbb/conic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cqpbb/envelope.hpp"

namespace cqpbb {

SearchBox SearchBox::from_problem(const ProblemCQP& p) { return {p.args, p.bounds}; }

const char* to_string(RelaxationStatus s) {
  switch (s) {
    case RelaxationStatus::Optimal: return "optimal";
    case RelaxationStatus::Infeasible: return "infeasible";
    case RelaxationStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

Eigen::MatrixXd embed_hermitian(const HermitianMatrix& h) {
  const Eigen::Index n = h.rows();
  Eigen::MatrixXd t(2 * n, 2 * n);
  t.topLeftCorner(n, n) = h.real();
  t.topRightCorner(n, n) = -h.imag();
  t.bottomLeftCorner(n, n) = h.imag();
  t.bottomRightCorner(n, n) = h.real();
  return t;
}

namespace {

constexpr int kLpPlaceholder = -7;

class Builder {
 public:
  Builder(const ProblemCQP& p, const SearchBox& box, RelaxationKind kind) : p_(p), box_(box) {
    require_valid(p);
    if (box.size() != p.n) throw std::invalid_argument("search box dimension differs from problem");
    auto& L = rp_.layout;
    L.kind = kind;
    L.n = p.n;
    L.is_fixed.assign(p.n, 0);
    L.fixed_value = ComplexVector::Zero(p.n);
    for (int i = 0; i < p.n; ++i) {
      const auto& b = box.bounds[i];
      const auto& a = box.args[i];
      if (b.hi == 0.0) {
        L.is_fixed[i] = 1;
      } else if (kind == RelaxationKind::Ecsdr && b.is_fixed() && a.is_singleton()) {
        L.is_fixed[i] = 1;
        L.fixed_value[i] = std::polar(b.lo, a.min_angle());
      } else {
        L.free_index.push_back(i);
      }
    }
    L.N = 1 + static_cast<int>(L.free_index.size());
  }

  RelaxationProgram build() {
    auto& L = rp_.layout;
    auto& prog = rp_.program;
    const int nf = L.N - 1;

    // Substitute fixed coordinates: c' = c_R + Q_{R,F} a, constant from F.
    ComplexVector a = L.fixed_value;
    const ComplexVector qa = p_.Q * a;
    double constant = 0.5 * a.dot(qa).real() + p_.c.dot(a).real();
    prog.objective_offset = constant;
    if (nf == 0) return std::move(rp_);

    HermitianMatrix g = HermitianMatrix::Zero(L.N, L.N);
    for (int k = 0; k < nf; ++k) {
      const int i = L.free_index[k];
      const Complex ck = p_.c[i] + qa[i];
      g(1 + k, 0) = 0.5 * ck;
      g(0, 1 + k) = 0.5 * std::conj(ck);
      for (int l = 0; l < nf; ++l) g(1 + k, 1 + l) = 0.5 * p_.Q(i, L.free_index[l]);
    }
    const int N = L.N;
    big_ = prog.add_block(BlockKind::Psd, 2 * N);
    L.big_block = big_;
    const Eigen::MatrixXd t = embed_hermitian(g);
    for (int q = 0; q < 2 * N; ++q)
      for (int s = q; s < 2 * N; ++s)
        if (t(q, s) != 0.0) add_matrix_entry(prog.objective, big_, q, s, 0.5 * t(q, s));

    // Corner and embedding structure.
    {
      LinearConstraint c;
      add_functional(c.terms, big_, 0, 0, 1.0);
      c.rhs = 1.0;
      push(std::move(c));
    }
    for (int i = 0; i < N; ++i) {
      for (int j = i; j < N; ++j) {
        LinearConstraint re;
        add_functional(re.terms, big_, i, j, 1.0);
        add_functional(re.terms, big_, N + i, N + j, -1.0);
        push(std::move(re));
        LinearConstraint im;
        add_functional(im.terms, big_, i, N + j, 1.0);
        add_functional(im.terms, big_, j, N + i, 1.0);
        push(std::move(im));
      }
    }

    L.r_index.assign(nf, -1);
    L.arrow_block.assign(nf, -1);
    L.square_block.assign(nf, -1);
    for (int k = 0; k < nf; ++k) coordinate(k);

    if (lp_count_ > 0) {
      L.lp_block = prog.add_block(BlockKind::Nonneg, lp_count_);
      auto patch = [&](std::vector<MatrixEntry>& terms) {
        for (auto& e : terms)
          if (e.block == kLpPlaceholder) e.block = L.lp_block;
      };
      patch(prog.objective);
      for (auto& c : prog.constraints) patch(c.terms);
      for (auto& s : L.slacks)
        if (s.block == kLpPlaceholder) s.block = L.lp_block;
    }
    for (auto& c : prog.constraints) canonicalize(c.terms);
    canonicalize(prog.objective);
    prog.check();
    return std::move(rp_);
  }

 private:
  int push(LinearConstraint c) {
    rp_.program.constraints.push_back(std::move(c));
    return rp_.program.num_constraints() - 1;
  }
  int new_lp() { return lp_count_++; }
  void add_lp(LinearConstraint& c, int index, double coef) {
    c.terms.push_back({kLpPlaceholder, index, index, coef});
  }
  // Appends `coef * slack` with a fresh nonnegative slack and records it.
  void add_slack(LinearConstraint& c, double coef) {
    const int s = new_lp();
    add_lp(c, s, coef);
    rp_.layout.slacks.push_back({rp_.program.num_constraints(), kLpPlaceholder, s, coef});
  }

  void coordinate(int k) {
    auto& L = rp_.layout;
    auto& prog = rp_.program;
    const int N = L.N;
    const int i = L.free_index[k];
    const int p = 1 + k;        // row of x_k in the bordered matrix
    const int re = p, im = N + p;  // Re x_k = Z(re, 0), Im x_k = Z(im, 0)
    const double lo = box_.bounds[i].lo;
    const double hi = box_.bounds[i].hi;
    const bool pinned = box_.bounds[i].is_fixed();

    // lo^2 <= X_kk <= hi^2
    if (pinned) {
      LinearConstraint c;
      add_functional(c.terms, big_, p, p, 1.0);
      c.rhs = lo * lo;
      push(std::move(c));
    } else {
      if (lo > 0.0) {
        LinearConstraint c;
        add_functional(c.terms, big_, p, p, 1.0);
        add_slack(c, -1.0);
        c.rhs = lo * lo;
        push(std::move(c));
      }
      LinearConstraint c;
      add_functional(c.terms, big_, p, p, 1.0);
      add_slack(c, 1.0);
      c.rhs = hi * hi;
      push(std::move(c));
    }
    if (L.kind == RelaxationKind::Csdr) return;

    const int r = new_lp();
    L.r_index[k] = r;
    if (pinned) {
      LinearConstraint c;
      add_lp(c, r, 1.0);
      c.rhs = lo;
      push(std::move(c));
    } else {
      if (lo > 0.0) {
        LinearConstraint c;
        add_lp(c, r, 1.0);
        add_slack(c, -1.0);
        c.rhs = lo;
        push(std::move(c));
      }
      {
        LinearConstraint c;
        add_lp(c, r, 1.0);
        add_slack(c, 1.0);
        c.rhs = hi;
        push(std::move(c));
      }
      // X_kk - (lo + hi) r + lo hi <= 0
      {
        LinearConstraint c;
        add_functional(c.terms, big_, p, p, 1.0);
        add_lp(c, r, -(lo + hi));
        add_slack(c, 1.0);
        c.rhs = -lo * hi;
        push(std::move(c));
      }
      // [[X_kk, r], [r, 1]] >= 0
      const int sq = prog.add_block(BlockKind::Psd, 2);
      L.square_block[k] = sq;
      LinearConstraint c0;
      add_functional(c0.terms, sq, 0, 0, 1.0);
      add_functional(c0.terms, big_, p, p, -1.0);
      push(std::move(c0));
      LinearConstraint c1;
      add_functional(c1.terms, sq, 0, 1, 1.0);
      add_lp(c1, r, -1.0);
      push(std::move(c1));
      LinearConstraint c2;
      add_functional(c2.terms, sq, 1, 1, 1.0);
      c2.rhs = 1.0;
      push(std::move(c2));
    }

    const ArgumentEnvelope env = build_argument_envelope(box_.args[i]);
    for (const auto& cut : env.cuts) {
      LinearConstraint c;
      add_functional(c.terms, big_, re, 0, cut.alpha);
      add_functional(c.terms, big_, im, 0, cut.beta);
      add_lp(c, r, -cut.gamma);
      if (cut.sense == CutSense::GreaterEqual) add_slack(c, -1.0);
      if (cut.sense == CutSense::LessEqual) add_slack(c, 1.0);
      push(std::move(c));
    }
    if (env.include_disk) {
      // [[r, Re x, Im x], [Re x, r, 0], [Im x, 0, r]] >= 0  <=>  |x| <= r
      const int ab = prog.add_block(BlockKind::Psd, 3);
      L.arrow_block[k] = ab;
      for (int d = 0; d < 3; ++d) {
        LinearConstraint c;
        add_functional(c.terms, ab, d, d, 1.0);
        add_lp(c, r, -1.0);
        push(std::move(c));
      }
      LinearConstraint cr;
      add_functional(cr.terms, ab, 0, 1, 1.0);
      add_functional(cr.terms, big_, re, 0, -1.0);
      push(std::move(cr));
      LinearConstraint ci;
      add_functional(ci.terms, ab, 0, 2, 1.0);
      add_functional(ci.terms, big_, im, 0, -1.0);
      push(std::move(ci));
      LinearConstraint cz;
      add_functional(cz.terms, ab, 1, 2, 1.0);
      push(std::move(cz));
    }
  }

  const ProblemCQP& p_;
  const SearchBox& box_;
  RelaxationProgram rp_;
  int big_ = -1;
  int lp_count_ = 0;
};

}  // namespace

RelaxationProgram build_csdr(const ProblemCQP& p) {
  const SearchBox box = SearchBox::from_problem(p);
  return Builder(p, box, RelaxationKind::Csdr).build();
}

RelaxationProgram build_ecsdr(const ProblemCQP& p, const SearchBox& box) {
  return Builder(p, box, RelaxationKind::Ecsdr).build();
}

namespace {

// Full-dimension (x, X, r) from the free part and the fixed values.
void assemble_full(const RelaxationLayout& L, const ComplexVector& xf, const HermitianMatrix& Xf,
                   const std::vector<double>& rf, RelaxationSolution& out) {
  out.x = L.fixed_value;
  out.r.assign(L.n, 0.0);
  for (int i = 0; i < L.n; ++i)
    if (L.is_fixed[i]) out.r[i] = std::abs(L.fixed_value[i]);
  for (std::size_t k = 0; k < L.free_index.size(); ++k) {
    out.x[L.free_index[k]] = xf[k];
    out.r[L.free_index[k]] = rf[k];
  }
  out.X = out.x * out.x.adjoint();
  for (std::size_t k = 0; k < L.free_index.size(); ++k)
    for (std::size_t l = 0; l < L.free_index.size(); ++l) out.X(L.free_index[k], L.free_index[l]) = Xf(k, l);
}

}  // namespace

RelaxationSolution extract_solution(const RelaxationProgram& rp, const ConicSolution& raw) {
  const auto& L = rp.layout;
  RelaxationSolution out;
  out.used_solver = true;
  out.solver_status = raw.status;
  out.solver_iterations = raw.iterations;
  out.primal_residual = raw.primal_residual;
  out.dual_residual = raw.dual_residual;
  out.relative_gap = raw.relative_gap;
  out.min_eig_z = raw.min_eig_z;
  out.min_eig_s = raw.min_eig_s;
  out.value = raw.primal_objective;
  if (raw.status == SolveStatus::Infeasible) {
    out.status = RelaxationStatus::Infeasible;
    return out;
  }
  if (raw.status != SolveStatus::Optimal || L.big_block < 0) {
    out.status = RelaxationStatus::NumericalFailure;
    return out;
  }
  const Eigen::MatrixXd& z = raw.z[L.big_block];
  const int N = L.N;
  const Eigen::MatrixXd z11 = z.topLeftCorner(N, N), z22 = z.bottomRightCorner(N, N);
  const Eigen::MatrixXd z12 = z.topRightCorner(N, N), z21 = z.bottomLeftCorner(N, N);
  const double sym = std::max((z11 - z22).cwiseAbs().maxCoeff(), (z12 + z21).cwiseAbs().maxCoeff());
  if (std::abs(z(0, 0) - 1.0) > 1e-6 || sym > 1e-5) {
    out.status = RelaxationStatus::NumericalFailure;
    return out;
  }
  HermitianMatrix y(N, N);
  y.real() = 0.5 * (z11 + z22);
  y.imag() = 0.5 * (z21 - z12);
  const int nf = N - 1;
  const ComplexVector xf = y.col(0).tail(nf);
  const HermitianMatrix Xf = y.bottomRightCorner(nf, nf);
  std::vector<double> rf(nf);
  for (int k = 0; k < nf; ++k) {
    if (L.kind == RelaxationKind::Ecsdr)
      rf[k] = raw.z[L.lp_block](L.r_index[k], 0);
    else
      rf[k] = std::sqrt(std::max(Xf(k, k).real(), 0.0));
  }
  assemble_full(L, xf, Xf, rf, out);
  out.status = RelaxationStatus::Optimal;
  return out;
}

RelaxationSolution solve_relaxation(const ProblemCQP& p, const RelaxationProgram& rp, const SolverConfig& cfg) {
  if (rp.layout.big_block < 0) {
    RelaxationSolution out;
    assemble_full(rp.layout, ComplexVector(), HermitianMatrix(), {}, out);
    out.value = evaluate_objective(p, out.x);
    out.status = RelaxationStatus::Optimal;
    return out;
  }
  return extract_solution(rp, solve(rp.program, cfg));
}

bool check_tightness(const ProblemCQP& p, const RelaxationSolution& s, double tol) {
  for (int i = 0; i < p.n; ++i) {
    if (s.r[i] - std::abs(s.x[i]) > tol) return false;
    if (s.X(i, i).real() - s.r[i] * s.r[i] > tol) return false;
  }
  return true;
}

BlockValues lift_point(const RelaxationProgram& rp, const ComplexVector& x, const HermitianMatrix& X,
                       const std::vector<double>& r) {
  const auto& L = rp.layout;
  const auto& prog = rp.program;
  BlockValues z = prog.zero_values();
  if (L.big_block < 0) return z;
  const int N = L.N;
  const int nf = N - 1;
  HermitianMatrix y(N, N);
  y(0, 0) = 1.0;
  for (int k = 0; k < nf; ++k) {
    const int i = L.free_index[k];
    y(1 + k, 0) = x[i];
    y(0, 1 + k) = std::conj(x[i]);
    for (int l = 0; l < nf; ++l) y(1 + k, 1 + l) = X(i, L.free_index[l]);
  }
  z[L.big_block] = embed_hermitian(y);
  for (int k = 0; k < nf; ++k) {
    const int i = L.free_index[k];
    if (L.kind == RelaxationKind::Ecsdr) z[L.lp_block](L.r_index[k], 0) = r[i];
    if (L.square_block[k] >= 0) {
      auto& b = z[L.square_block[k]];
      b << X(i, i).real(), r[i], r[i], 1.0;
    }
    if (L.arrow_block[k] >= 0) {
      auto& b = z[L.arrow_block[k]];
      b << r[i], x[i].real(), x[i].imag(), x[i].real(), r[i], 0.0, x[i].imag(), 0.0, r[i];
    }
  }
  for (const auto& s : L.slacks) {
    const auto& c = prog.constraints[s.row];
    z[s.block](s.index, 0) = (c.rhs - inner(c.terms, z)) / s.coef;
  }
  return z;
}

double program_primal_violation(const ConicProgram& prog, const BlockValues& z) {
  return std::max(equality_violation(prog, z), std::max(0.0, -min_cone_eigenvalue(prog, z)));
}

}  // namespace cqpbb
