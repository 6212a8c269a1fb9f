#include "cqpbb/bb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

#include "cqpbb/envelope.hpp"

namespace cqpbb {

namespace {

constexpr double kTieTol = 1e-12;
constexpr double kZeroModulus = 1e-12;

double midpoint_angle(const ArgumentSet& a) {
  const double mid = 0.5 * (a.min_angle() + a.max_angle());
  return a.is_discrete() ? nearest_angle(a, mid) : normalize_angle(mid);
}

// Smaller of two candidate angles in [0, 2pi) at (nearly) equal distance.
double pick(double best, double best_d, double cand, double cand_d) {
  if (cand_d < best_d - kTieTol) return cand;
  if (cand_d <= best_d + kTieTol && normalize_angle(cand) < normalize_angle(best)) return cand;
  return best;
}

}  // namespace

double nearest_angle(const ArgumentSet& a, double theta) {
  if (a.is_discrete()) {
    double best = a.angles.front();
    double best_d = circular_distance(theta, best);
    for (std::size_t j = 1; j < a.angles.size(); ++j) {
      const double d = circular_distance(theta, a.angles[j]);
      const double next = pick(best, best_d, a.angles[j], d);
      if (next != best) {
        best = next;
        best_d = d;
      }
    }
    return best;
  }
  const double offset = normalize_angle(theta - a.lo);
  if (offset <= a.hi - a.lo) return normalize_angle(a.lo + offset);
  const double dlo = circular_distance(theta, a.lo);
  const double dhi = circular_distance(theta, a.hi);
  return normalize_angle(pick(a.lo, dlo, a.hi, dhi));
}

ComplexVector scale_point(const ComplexVector& x, const std::vector<double>& r, const std::vector<ArgumentSet>& args) {
  if (static_cast<std::size_t>(x.size()) != r.size() || r.size() != args.size())
    throw std::invalid_argument("scale_point: dimension mismatch");
  ComplexVector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double theta =
        std::abs(x[i]) <= kZeroModulus ? midpoint_angle(args[i]) : nearest_angle(args[i], std::arg(x[i]));
    out[i] = std::polar(r[i], theta);
  }
  return out;
}

BranchScore branch_score(const BBNode& node) {
  BranchScore s;
  s.s1 = -std::numeric_limits<double>::infinity();
  s.s2 = -std::numeric_limits<double>::infinity();
  const auto& rel = node.relax;
  for (Eigen::Index i = 0; i < rel.x.size(); ++i) {
    const double d1 = std::abs(node.scaled[i] - rel.x[i]);
    const double d2 = rel.X(i, i).real() - rel.r[i] * rel.r[i];
    if (d1 > s.s1) {
      s.s1 = d1;
      s.i1 = static_cast<int>(i);
    }
    if (d2 > s.s2) {
      s.s2 = d2;
      s.i2 = static_cast<int>(i);
    }
  }
  return s;
}

bool splittable(const SearchBox& box, const BranchScore& score) {
  if (score.s1 >= score.s2) {
    const auto& a = box.args[score.i1];
    return a.is_discrete() ? a.angles.size() >= 2 : a.hi > a.lo;
  }
  const auto& b = box.bounds[score.i2];
  return b.hi > b.lo;
}

std::pair<SearchBox, SearchBox> branch(const SearchBox& box, const BranchScore& score) {
  if (!splittable(box, score)) throw std::invalid_argument("degenerate branch");
  SearchBox lo = box, hi = box;
  if (score.s1 >= score.s2) {
    const auto& a = box.args[score.i1];
    const double mid = 0.5 * (a.min_angle() + a.max_angle());
    if (a.is_discrete()) {
      std::vector<double> left, right;
      for (double t : a.angles) (t <= mid ? left : right).push_back(t);
      lo.args[score.i1] = ArgumentSet::discrete(std::move(left));
      hi.args[score.i1] = ArgumentSet::discrete(std::move(right));
    } else {
      lo.args[score.i1] = ArgumentSet::interval(a.lo, mid);
      hi.args[score.i1] = ArgumentSet::interval(mid, a.hi);
    }
  } else {
    const auto& b = box.bounds[score.i2];
    const double mid = 0.5 * (b.lo + b.hi);
    lo.bounds[score.i2] = {b.lo, mid};
    hi.bounds[score.i2] = {mid, b.hi};
  }
  return {std::move(lo), std::move(hi)};
}

double worst_case_iterations(const ProblemCQP& p, const ComplexityConstants& k) {
  const double k1 = std::min(k.kappa1, kPi);
  double total = 1.0;
  for (int i = 0; i < p.n; ++i) {
    const auto& a = p.args[i];
    const double mu = a.is_discrete() ? static_cast<double>(a.angles.size())
                                      : std::max(std::ceil(2.0 * width_argument(a) / k1), 1.0);
    const double beta = std::max(std::ceil(2.0 * width_modulus(p.bounds[i]) / k.kappa2), 1.0);
    total *= mu * beta;
  }
  return std::isfinite(total) ? total : std::numeric_limits<double>::infinity();
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::EpsilonOptimal: return "epsilon-optimal";
    case RunStatus::IterationLimit: return "iteration-limit";
    case RunStatus::TimeLimit: return "time-limit";
  }
  return "unknown";
}

void BBConfig::check() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (limits.max_iterations < 1) throw std::invalid_argument("iteration limit must be at least 1");
  if (!(limits.time_limit_seconds > 0.0)) throw std::invalid_argument("time limit must be positive");
  if (!(root_polish_tol >= 0.0)) throw std::invalid_argument("root polish tolerance must be nonnegative");
  solver.check();
}

long RunReport::verification_failures() const {
  return std::count_if(verification.begin(), verification.end(), [](const auto& v) { return !v.passed; });
}

double closed_gap(double lbd_e, double lbd_c, double objective) {
  if (!(objective > lbd_c + 1e-12)) return 100.0;
  return (lbd_e - lbd_c) / (objective - lbd_c) * 100.0;
}

std::vector<VerificationRecord> verify_iteration(const ProblemCQP& p, const BBNode& node, const BranchScore& score,
                                                 double upper, long iteration, double epsilon,
                                                 const ComplexityConstants& k) {
  std::vector<VerificationRecord> out;
  const double f = evaluate_objective(p, node.scaled);
  {
    VerificationRecord v;
    v.iteration = iteration;
    v.check = "lemma1";
    v.lhs = f - node.lower;
    v.rhs = k.m1 * std::max(score.s1, 0.0) + k.m2 * std::max(score.s2, 0.0) + 1e-6;
    v.passed = v.lhs <= v.rhs;
    v.detail = "F(xhat) - L <= m1 s1 + m2 s2 + 1e-6";
    out.push_back(std::move(v));
  }
  const bool arg_side = score.s1 >= score.s2;
  const auto& a = node.box.args[score.i1];
  const auto& b = node.box.bounds[score.i2];
  std::string cond;
  if (arg_side && a.is_interval() && a.hi - a.lo <= std::min(k.kappa1, kPi)) cond = "C1";
  if (arg_side && a.is_singleton()) cond = "C2";
  if (!arg_side && b.hi - b.lo <= k.kappa2) cond = "C3";
  if (!cond.empty()) {
    VerificationRecord v;
    v.iteration = iteration;
    v.check = "lemma2";
    v.lhs = upper - node.lower;
    v.rhs = epsilon;
    v.passed = v.lhs <= v.rhs;
    v.detail = cond + " holds, termination test must pass";
    out.push_back(std::move(v));
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

SolverConfig loosened(SolverConfig cfg) {
  cfg.feasibility_tol *= 10.0;
  cfg.gap_tol *= 10.0;
  cfg.polish_tol = 0.0;
  return cfg;
}

struct ChildResult {
  RelaxationSolution relax;
  bool retried = false;
  bool failed = false;
};

ChildResult solve_box(const ProblemCQP& p, const SearchBox& box, const SolverConfig& cfg) {
  ChildResult out;
  const RelaxationProgram rp = build_ecsdr(p, box);
  out.relax = solve_relaxation(p, rp, cfg);
  if (out.relax.status == RelaxationStatus::Optimal) return out;
  out.retried = true;
  out.relax = solve_relaxation(p, rp, loosened(cfg));
  out.failed = out.relax.status != RelaxationStatus::Optimal;
  return out;
}

std::vector<double> clamp_moduli(const std::vector<double>& r, const SearchBox& box) {
  std::vector<double> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = std::clamp(r[i], box.bounds[i].lo, box.bounds[i].hi);
  return out;
}

// Node from a child solve; a failed solve inherits the parent's solution and
// bound, which stay valid because the child's feasible set is smaller.
BBNode make_node(SearchBox box, ChildResult res, const BBNode* parent) {
  BBNode node;
  if (res.failed) {
    node.relax = parent->relax;
    node.lower = parent->lower;
    node.degraded = true;
  } else {
    node.relax = std::move(res.relax);
    node.lower = node.relax.value;
    // Relaxations over sub-boxes are tighter; lifting to the parent's bound
    // removes solver noise without losing validity.
    if (parent) node.lower = std::max(node.lower, parent->lower);
  }
  node.relax.r = clamp_moduli(node.relax.r, box);
  node.scaled = scale_point(node.relax.x, node.relax.r, box.args);
  node.box = std::move(box);
  return node;
}

// Fallback when the scored set cannot be split: the widest splittable set.
bool any_split(const SearchBox& box, BranchScore& score) {
  double best = 0.0;
  bool found = false;
  for (int i = 0; i < box.size(); ++i) {
    const auto& a = box.args[i];
    const double wa = a.is_discrete() ? (a.angles.size() >= 2 ? width_argument(a) : 0.0) : a.hi - a.lo;
    if (wa > best) {
      best = wa;
      found = true;
      score = {i, 1.0, i, 0.0};
    }
  }
  for (int i = 0; i < box.size(); ++i) {
    const double wb = width_modulus(box.bounds[i]);
    if (wb > best) {
      best = wb;
      found = true;
      score = {i, 0.0, i, 1.0};
    }
  }
  return found;
}

}  // namespace

RunReport run(const ProblemCQP& p, const BBConfig& cfg) {
  cfg.check();
  require_valid(p);
  const auto t0 = Clock::now();
  RunReport rep;
  rep.constants = compute_constants(p, cfg.epsilon);
  rep.k_bound = worst_case_iterations(p, rep.constants);

  SolverConfig root_cfg = cfg.solver;
  root_cfg.polish_tol = cfg.root_polish_tol;

  const SearchBox root_box = SearchBox::from_problem(p);
  auto te = Clock::now();
  ChildResult root_res = solve_box(p, root_box, root_cfg);
  rep.time_e = seconds_since(te);
  rep.nodes = 1;
  if (root_res.retried) ++rep.solver_retries;
  if (root_res.failed) {
    throw std::runtime_error(std::string("root relaxation failed: ") + to_string(root_res.relax.status));
  }
  rep.root_tight = check_tightness(p, root_res.relax, 1e-7);

  if (cfg.solve_csdr_root) {
    auto tc = Clock::now();
    const RelaxationProgram rc = build_csdr(p);
    RelaxationSolution sc = solve_relaxation(p, rc, root_cfg);
    if (sc.status != RelaxationStatus::Optimal) sc = solve_relaxation(p, rc, loosened(cfg.solver));
    rep.time_c = seconds_since(tc);
    if (sc.status == RelaxationStatus::Optimal) rep.lbd_c = sc.value;
  }

  BBNode root = make_node(root_box, std::move(root_res), nullptr);
  rep.lbd_e = root.lower;
  double upper = evaluate_objective(p, root.scaled);
  ComplexVector incumbent = root.scaled;

  std::multimap<double, BBNode> active;  // equal keys keep insertion order
  active.emplace(root.lower, std::move(root));
  double final_lower = rep.lbd_e;
  RunStatus status = RunStatus::EpsilonOptimal;
  long k = 0;

  auto prune = [&] {
    active.erase(active.lower_bound(upper - 1e-12), active.end());
  };
  auto offer = [&](BBNode node) {
    const double f = evaluate_objective(p, node.scaled);
    if (f < upper) {
      upper = f;
      incumbent = node.scaled;
      prune();
    }
    if (node.lower < upper - 1e-12) active.emplace(node.lower, std::move(node));
  };

  while (true) {
    if (active.empty()) {
      // Every remaining box was pruned: the incumbent is optimal.
      final_lower = upper;
      break;
    }
    if (k >= cfg.limits.max_iterations) {
      status = RunStatus::IterationLimit;
      final_lower = active.begin()->first;
      break;
    }
    if (seconds_since(t0) > cfg.limits.time_limit_seconds) {
      status = RunStatus::TimeLimit;
      final_lower = active.begin()->first;
      break;
    }
    ++k;
    auto it = active.begin();
    BBNode node = std::move(it->second);
    active.erase(it);

    BranchScore score = branch_score(node);
    if (cfg.verify && !node.degraded) {
      auto recs = verify_iteration(p, node, score, upper, k, cfg.epsilon, rep.constants);
      rep.verification.insert(rep.verification.end(), recs.begin(), recs.end());
    }
    if (cfg.progress) cfg.progress({k, node.lower, upper, active.size()});

    if (upper - node.lower <= cfg.epsilon) {
      final_lower = node.lower;
      break;
    }
    if (!splittable(node.box, score) && !any_split(node.box, score)) {
      // A single point: its value is already reflected in the incumbent.
      continue;
    }
    auto [box_lo, box_hi] = branch(node.box, score);

    ChildResult res_lo, res_hi;
    const SolverConfig& node_cfg = cfg.solver;
#pragma omp parallel sections if (cfg.parallel_children)
    {
#pragma omp section
      res_lo = solve_box(p, box_lo, node_cfg);
#pragma omp section
      res_hi = solve_box(p, box_hi, node_cfg);
    }
    rep.nodes += 2;
    for (ChildResult* r : {&res_lo, &res_hi}) {
      if (r->retried) ++rep.solver_retries;
      if (r->failed) ++rep.degraded_nodes;
    }
    offer(make_node(std::move(box_lo), std::move(res_lo), &node));
    offer(make_node(std::move(box_hi), std::move(res_hi), &node));
  }

  rep.status = status;
  rep.iterations = k;
  rep.objective = upper;
  rep.x = incumbent;
  rep.final_lower = std::min(final_lower, upper);
  if (!std::isnan(rep.lbd_c)) {
    rep.cld_gap_raw = closed_gap(rep.lbd_e, rep.lbd_c, rep.objective);
    rep.cld_gap = std::clamp(rep.cld_gap_raw, 0.0, 100.0);
  }
  if (cfg.verify) {
    VerificationRecord v;
    v.iteration = k;
    v.check = "theorem3";
    v.lhs = static_cast<double>(k);
    v.rhs = rep.k_bound;
    v.passed = v.lhs <= v.rhs;
    v.detail = "iterations <= K";
    rep.verification.push_back(std::move(v));
  }
  rep.time_total = seconds_since(t0);
  return rep;
}

}  // namespace cqpbb
