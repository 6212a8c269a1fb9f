#include "cqpbb/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "cqpbb/rng.hpp"

namespace cqpbb {

namespace {

const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) throw std::runtime_error(std::string("missing field '") + name + "'");
  return j.at(name);
}

template <typename T>
T get(const Json& j, const char* name) {
  try {
    return field(j, name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("field '") + name + "': " + e.what());
  }
}

// JSON has no NaN or infinity: NaN is written as null, infinities as the
// strings "inf" and "-inf".
Json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_or_nan(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (v == "inf") return std::numeric_limits<double>::infinity();
  if (v == "-inf") return -std::numeric_limits<double>::infinity();
  if (!v.is_number()) throw std::runtime_error(std::string("field '") + name + "' is not a number");
  return v.get<double>();
}

Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from(const Json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw std::runtime_error("complex numbers must be [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

Json args_json(const ArgumentSet& a) {
  Json j;
  if (a.is_discrete()) {
    j["type"] = "discrete";
    j["angles"] = a.angles;
  } else {
    j["type"] = "interval";
    j["lo"] = a.lo;
    j["hi"] = a.hi;
  }
  return j;
}

// Built field by field so that a round trip reproduces every bit; the caller
// validates the result.
ArgumentSet args_from(const Json& j) {
  const auto type = get<std::string>(j, "type");
  ArgumentSet a;
  if (type == "discrete") {
    a.kind = ArgumentKind::Discrete;
    a.angles = get<std::vector<double>>(j, "angles");
    if (a.angles.empty()) throw std::runtime_error("discrete argument set is empty");
    a.lo = a.angles.front();
    a.hi = a.angles.back();
  } else if (type == "interval") {
    a.kind = ArgumentKind::Interval;
    a.lo = get<double>(j, "lo");
    a.hi = get<double>(j, "hi");
  } else {
    throw std::runtime_error("unknown argument set type '" + type + "'");
  }
  return a;
}

Json mimo_json(const MimoSpec& s) {
  return Json{{"m", s.m}, {"n", s.n}, {"M", s.M}, {"snr_db", s.snr_db}, {"seed", s.seed}};
}

MimoSpec mimo_from(const Json& j) {
  MimoSpec s;
  s.m = get<int>(j, "m");
  s.n = get<int>(j, "n");
  s.M = get<int>(j, "M");
  s.snr_db = get<double>(j, "snr_db");
  s.seed = get<std::uint64_t>(j, "seed");
  s.check();
  return s;
}

Json radar_json(const RadarSpec& s) {
  return Json{{"n", s.n},
              {"rho", s.rho ? Json(*s.rho) : Json(nullptr)},
              {"fd_tr", s.fd_tr},
              {"delta_angle", s.delta_angle},
              {"x0", s.x0},
              {"seed", s.seed}};
}

RadarSpec radar_from(const Json& j) {
  RadarSpec s;
  s.n = get<int>(j, "n");
  if (!field(j, "rho").is_null()) s.rho = get<double>(j, "rho");
  s.fd_tr = get<double>(j, "fd_tr");
  s.delta_angle = get<double>(j, "delta_angle");
  s.x0 = get<std::vector<double>>(j, "x0");
  s.seed = get<std::uint64_t>(j, "seed");
  s.check();
  return s;
}

Json vb_json(const VbSpec& s) { return Json{{"m", s.m}, {"n", s.n}, {"power", s.power}, {"seed", s.seed}}; }

VbSpec vb_from(const Json& j) {
  VbSpec s;
  s.m = get<int>(j, "m");
  s.n = get<int>(j, "n");
  s.power = get<std::vector<double>>(j, "power");
  s.seed = get<std::uint64_t>(j, "seed");
  s.check();
  return s;
}

}  // namespace

Instance InstanceFile::materialize() const {
  if (kind == "mimo") return gen_mimo(mimo);
  if (kind == "radar") return gen_radar(radar);
  if (kind == "vb") return gen_vb(vb);
  if (kind == "raw-cqp") {
    require_valid(raw.problem);
    return raw;
  }
  throw std::runtime_error("unknown instance kind '" + kind + "'");
}

Json problem_to_json(const ProblemCQP& p) {
  Json j;
  j["n"] = p.n;
  Json q = Json::array();
  for (int i = 0; i < p.Q.rows(); ++i) {
    Json row = Json::array();
    for (int k = 0; k < p.Q.cols(); ++k) row.push_back(complex_json(p.Q(i, k)));
    q.push_back(std::move(row));
  }
  j["Q"] = std::move(q);
  Json c = Json::array();
  for (int i = 0; i < p.c.size(); ++i) c.push_back(complex_json(p.c[i]));
  j["c"] = std::move(c);
  Json bounds = Json::array();
  for (const auto& b : p.bounds) bounds.push_back(Json::array({b.lo, b.hi}));
  j["bounds"] = std::move(bounds);
  Json args = Json::array();
  for (const auto& a : p.args) args.push_back(args_json(a));
  j["args"] = std::move(args);
  return j;
}

ProblemCQP problem_from_json(const Json& j) {
  ProblemCQP p;
  p.n = get<int>(j, "n");
  if (p.n <= 0) throw std::runtime_error("n must be positive");
  const Json& q = field(j, "Q");
  if (!q.is_array() || static_cast<int>(q.size()) != p.n) throw std::runtime_error("Q must have n rows");
  p.Q.resize(p.n, p.n);
  for (int i = 0; i < p.n; ++i) {
    if (!q[i].is_array() || static_cast<int>(q[i].size()) != p.n) throw std::runtime_error("Q must have n columns");
    for (int k = 0; k < p.n; ++k) p.Q(i, k) = complex_from(q[i][k]);
  }
  const Json& c = field(j, "c");
  if (!c.is_array() || static_cast<int>(c.size()) != p.n) throw std::runtime_error("c must have n entries");
  p.c.resize(p.n);
  for (int i = 0; i < p.n; ++i) p.c[i] = complex_from(c[i]);
  for (const auto& b : field(j, "bounds")) {
    if (!b.is_array() || b.size() != 2) throw std::runtime_error("bounds must be [lo, hi] pairs");
    p.bounds.push_back({b[0].get<double>(), b[1].get<double>()});
  }
  for (const auto& a : field(j, "args")) p.args.push_back(args_from(a));
  const auto errors = validate(p);
  if (!errors.empty()) throw std::runtime_error("invalid problem: " + errors.front());
  return p;
}

Json instance_to_json(const InstanceFile& f) {
  Json j;
  j["format"] = "cqpbb-instance";
  j["version"] = kFormatVersion;
  j["kind"] = f.kind;
  if (f.kind == "mimo") {
    j["spec"] = mimo_json(f.mimo);
  } else if (f.kind == "radar") {
    j["spec"] = radar_json(f.radar);
  } else if (f.kind == "vb") {
    j["spec"] = vb_json(f.vb);
  } else if (f.kind == "raw-cqp") {
    j["problem"] = problem_to_json(f.raw.problem);
    j["display"] = Json{{"scale", f.raw.display_scale}, {"offset", f.raw.display_offset}};
  } else {
    throw std::runtime_error("unknown instance kind '" + f.kind + "'");
  }
  return j;
}

InstanceFile instance_from_json(const Json& j) {
  if (get<std::string>(j, "format") != "cqpbb-instance") throw std::runtime_error("not a cqpbb instance file");
  if (get<int>(j, "version") != kFormatVersion)
    throw std::runtime_error("unsupported instance format version " + std::to_string(get<int>(j, "version")));
  InstanceFile f;
  f.kind = get<std::string>(j, "kind");
  try {
    if (f.kind == "mimo") {
      f.mimo = mimo_from(field(j, "spec"));
    } else if (f.kind == "radar") {
      f.radar = radar_from(field(j, "spec"));
    } else if (f.kind == "vb") {
      f.vb = vb_from(field(j, "spec"));
    } else if (f.kind == "raw-cqp") {
      f.raw.family = "raw";
      f.raw.problem = problem_from_json(field(j, "problem"));
      if (j.contains("display")) {
        f.raw.display_scale = get<double>(j.at("display"), "scale");
        f.raw.display_offset = get<double>(j.at("display"), "offset");
      }
    } else {
      throw std::runtime_error("unknown instance kind '" + f.kind + "'");
    }
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(e.what());
  }
  return f;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("'" + path + "': " + e.what());
  }
}

InstanceFile read_instance_file(const std::string& path) {
  try {
    return instance_from_json(read_json_file(path));
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("error writing '" + path + "'");
}

std::string instance_id(const InstanceFile& f) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(instance_to_json(f).dump())));
  return buf;
}

std::string config_fingerprint(const SolverConfig& s) {
  std::ostringstream os;
  os << "feas=" << s.feasibility_tol << ";gap=" << s.gap_tol << ";maxit=" << s.max_iterations
     << ";step=" << s.step_fraction << ";infeas=" << s.infeasibility_tol;
  return os.str();
}

namespace {

ResultRecord base_record(const InstanceFile& f, const Instance& inst) {
  ResultRecord r;
  r.instance_id = instance_id(f);
  r.kind = f.kind;
  r.spec = instance_to_json(f);
  r.display_scale = inst.display_scale;
  r.display_offset = inst.display_offset;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.objval = r.lbd_e = r.lbd_c = r.cld_gap = r.final_lower = r.k_bound = nan;
  return r;
}

}  // namespace

ResultRecord record_from_run(const InstanceFile& f, const Instance& inst, const RunReport& rep, const BBConfig& cfg) {
  ResultRecord r = base_record(f, inst);
  r.mode = "bb";
  r.status = to_string(rep.status);
  r.objval = inst.display(rep.objective);
  r.lbd_e = inst.display(rep.lbd_e);
  r.lbd_c = std::isnan(rep.lbd_c) ? rep.lbd_c : inst.display(rep.lbd_c);
  if (!std::isnan(rep.lbd_c)) r.cld_gap = rep.cld_gap;
  r.final_lower = inst.display(rep.final_lower);
  r.iterations = rep.iterations;
  r.nodes = rep.nodes;
  r.time_total = rep.time_total;
  r.time_e = rep.time_e;
  r.time_c = rep.time_c;
  r.k_bound = rep.k_bound;
  r.epsilon = cfg.epsilon;
  std::ostringstream os;
  os << config_fingerprint(cfg.solver) << ";polish=" << cfg.root_polish_tol
     << ";max_iter=" << cfg.limits.max_iterations << ";time_limit=" << cfg.limits.time_limit_seconds;
  r.config = os.str();
  r.verification_failures = rep.verification_failures();
  r.verification = rep.verification;
  return r;
}

ResultRecord record_from_relaxation(const InstanceFile& f, const Instance& inst, RelaxationKind kind,
                                    const RelaxationSolution& s, double seconds, const SolverConfig& cfg) {
  ResultRecord r = base_record(f, inst);
  r.mode = kind == RelaxationKind::Ecsdr ? "ecsdr" : "csdr";
  r.status = to_string(s.status);
  if (s.status == RelaxationStatus::Optimal) (kind == RelaxationKind::Ecsdr ? r.lbd_e : r.lbd_c) = inst.display(s.value);
  r.time_total = seconds;
  (kind == RelaxationKind::Ecsdr ? r.time_e : r.time_c) = seconds;
  r.config = config_fingerprint(cfg);
  r.solver_status = to_string(s.solver_status);
  r.solver_iterations = s.solver_iterations;
  r.primal_residual = s.primal_residual;
  r.dual_residual = s.dual_residual;
  r.relative_gap = s.relative_gap;
  r.min_eig_z = s.min_eig_z;
  r.min_eig_s = s.min_eig_s;
  return r;
}

Json record_to_json(const ResultRecord& r) {
  Json j;
  j["format"] = "cqpbb-result";
  j["version"] = kFormatVersion;
  j["instance_id"] = r.instance_id;
  j["kind"] = r.kind;
  j["spec"] = r.spec;
  j["mode"] = r.mode;
  j["status"] = r.status;
  j["display_scale"] = r.display_scale;
  j["display_offset"] = r.display_offset;
  j["ObjVal"] = number(r.objval);
  j["LBdE"] = number(r.lbd_e);
  j["LBdC"] = number(r.lbd_c);
  j["CldGap"] = number(r.cld_gap);
  j["final_lower"] = number(r.final_lower);
  j["iterations"] = r.iterations;
  j["nodes"] = r.nodes;
  j["time_total"] = r.time_total;
  j["TimeE"] = r.time_e;
  j["TimeC"] = r.time_c;
  j["K"] = number(r.k_bound);
  j["epsilon"] = r.epsilon;
  j["config"] = r.config;
  j["solver"] = Json{{"status", r.solver_status},
                     {"iterations", r.solver_iterations},
                     {"primal_residual", r.primal_residual},
                     {"dual_residual", r.dual_residual},
                     {"relative_gap", r.relative_gap},
                     {"min_eig_z", r.min_eig_z},
                     {"min_eig_s", r.min_eig_s}};
  Json checks = Json::array();
  for (const auto& v : r.verification) {
    checks.push_back(Json{{"iteration", v.iteration},
                          {"check", v.check},
                          {"passed", v.passed},
                          {"lhs", number(v.lhs)},
                          {"rhs", number(v.rhs)},
                          {"detail", v.detail}});
  }
  j["verification"] = Json{{"failures", r.verification_failures}, {"checks", std::move(checks)}};
  return j;
}

ResultRecord record_from_json(const Json& j) {
  if (get<std::string>(j, "format") != "cqpbb-result") throw std::runtime_error("not a cqpbb result file");
  ResultRecord r;
  r.instance_id = get<std::string>(j, "instance_id");
  r.kind = get<std::string>(j, "kind");
  r.spec = field(j, "spec");
  r.mode = get<std::string>(j, "mode");
  r.status = get<std::string>(j, "status");
  r.display_scale = get<double>(j, "display_scale");
  r.display_offset = get<double>(j, "display_offset");
  r.objval = number_or_nan(j, "ObjVal");
  r.lbd_e = number_or_nan(j, "LBdE");
  r.lbd_c = number_or_nan(j, "LBdC");
  r.cld_gap = number_or_nan(j, "CldGap");
  r.final_lower = number_or_nan(j, "final_lower");
  r.iterations = get<long>(j, "iterations");
  r.nodes = get<long>(j, "nodes");
  r.time_total = get<double>(j, "time_total");
  r.time_e = get<double>(j, "TimeE");
  r.time_c = get<double>(j, "TimeC");
  r.k_bound = number_or_nan(j, "K");
  r.epsilon = get<double>(j, "epsilon");
  r.config = get<std::string>(j, "config");
  const Json& s = field(j, "solver");
  r.solver_status = get<std::string>(s, "status");
  r.solver_iterations = get<int>(s, "iterations");
  r.primal_residual = get<double>(s, "primal_residual");
  r.dual_residual = get<double>(s, "dual_residual");
  r.relative_gap = get<double>(s, "relative_gap");
  r.min_eig_z = get<double>(s, "min_eig_z");
  r.min_eig_s = get<double>(s, "min_eig_s");
  const Json& v = field(j, "verification");
  r.verification_failures = get<long>(v, "failures");
  for (const auto& c : field(v, "checks")) {
    VerificationRecord rec;
    rec.iteration = get<long>(c, "iteration");
    rec.check = get<std::string>(c, "check");
    rec.passed = get<bool>(c, "passed");
    rec.lhs = number_or_nan(c, "lhs");
    rec.rhs = number_or_nan(c, "rhs");
    rec.detail = get<std::string>(c, "detail");
    r.verification.push_back(std::move(rec));
  }
  return r;
}

}  // namespace cqpbb
