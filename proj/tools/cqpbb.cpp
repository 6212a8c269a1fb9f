// Command-line front end: generate instances, solve them, run benchmark
// suites, and compute brute-force optima.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cqpbb/apps.hpp"
#include "cqpbb/bb.hpp"
#include "cqpbb/bench_suite.hpp"
#include "cqpbb/conic.hpp"
#include "cqpbb/io.hpp"

using namespace cqpbb;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitSolve = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Angles such as "0.5", "pi", "pi/6", "2pi/3" or "2*pi/3".
double parse_angle(const std::string& s) {
  static const std::regex re(R"(^\s*([0-9.eE+-]*)\s*\*?\s*(pi)?\s*(?:/\s*([0-9.eE+-]+))?\s*$)");
  std::smatch m;
  if (!std::regex_match(s, m, re) || (m[1].str().empty() && !m[2].matched))
    throw UsageError("cannot parse angle '" + s + "'");
  try {
    double v = m[1].str().empty() ? 1.0 : std::stod(m[1].str());
    if (m[2].matched) v *= kPi;
    if (m[3].matched) v /= std::stod(m[3].str());
    return v;
  } catch (const std::exception&) {
    throw UsageError("cannot parse angle '" + s + "'");
  }
}

std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UsageError("cannot parse number '" + item + "' in '" + s + "'");
    }
  }
  return out;
}

void emit(const Json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json_file(out, j);
  }
}

struct GenerateOpts {
  std::string kind;
  int m = -1, n = -1, mod = 4;
  double snr = 15.0;
  std::uint64_t seed = 1;
  std::optional<double> rho;
  double fd_tr = 0.15;
  std::string delta = "pi/6";
  std::string x0;
  std::string power;
  std::string out;
};

int cmd_generate(const GenerateOpts& o) {
  InstanceFile f;
  f.kind = o.kind;
  if (o.kind == "mimo") {
    f.mimo = {o.m < 0 ? 8 : o.m, o.n < 0 ? 6 : o.n, o.mod, o.snr, o.seed};
    f.mimo.check();
  } else if (o.kind == "radar") {
    if (o.m >= 0) throw UsageError("radar takes no --m");
    f.radar.n = o.n < 0 ? 7 : o.n;
    f.radar.rho = o.rho;
    f.radar.fd_tr = o.fd_tr;
    f.radar.delta_angle = parse_angle(o.delta);
    if (!o.x0.empty()) f.radar.x0 = parse_numbers(o.x0);
    f.radar.seed = o.seed;
    f.radar.check();
  } else if (o.kind == "vb") {
    f.vb.m = o.m < 0 ? 5 : o.m;
    f.vb.n = o.n < 0 ? 5 : o.n;
    if (!o.power.empty()) f.vb.power = parse_numbers(o.power);
    f.vb.seed = o.seed;
    f.vb.check();
  } else {
    throw UsageError("unknown kind '" + o.kind + "'");
  }
  emit(instance_to_json(f), o.out);
  return kExitOk;
}

struct SolveOpts {
  std::string in;
  double epsilon = 1e-4;
  std::string relaxation = "bb";
  long max_iter = 100000;
  double time_limit = 0.0;
  bool verify = false;
  bool progress = false;
  std::string out;
};

int cmd_solve(const SolveOpts& o) {
  InstanceFile f;
  Instance inst;
  try {
    f = read_instance_file(o.in);
    inst = f.materialize();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  if (o.relaxation == "bb") {
    BBConfig cfg;
    cfg.epsilon = o.epsilon;
    cfg.limits.max_iterations = o.max_iter;
    if (o.time_limit > 0.0) cfg.limits.time_limit_seconds = o.time_limit;
    cfg.verify = o.verify;
    if (o.progress) {
      cfg.progress = [](const BBProgress& p) {
        std::fprintf(stderr, "iter %6ld  L %.8g  U %.8g  active %zu\n", p.iteration, p.lower, p.upper, p.active);
      };
    }
    try {
      cfg.check();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    RunReport rep;
    try {
      rep = run(inst.problem, cfg);
    } catch (const std::runtime_error& e) {
      std::cerr << "solve failed: " << e.what() << '\n';
      return kExitSolve;
    }
    emit(record_to_json(record_from_run(f, inst, rep, cfg)), o.out);
    return kExitOk;
  }
  const RelaxationKind kind = o.relaxation == "csdr" ? RelaxationKind::Csdr : RelaxationKind::Ecsdr;
  SolverConfig cfg;
  const auto t0 = std::chrono::steady_clock::now();
  const RelaxationProgram rp =
      kind == RelaxationKind::Csdr ? build_csdr(inst.problem) : build_ecsdr(inst.problem, SearchBox::from_problem(inst.problem));
  const RelaxationSolution s = solve_relaxation(inst.problem, rp, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit(record_to_json(record_from_relaxation(f, inst, kind, s, secs, cfg)), o.out);
  if (s.status != RelaxationStatus::Optimal) {
    std::cerr << "relaxation not solved: " << to_string(s.status) << '\n';
    return kExitSolve;
  }
  return kExitOk;
}

struct BenchOpts {
  std::string suite = "mimo";
  int reps = 5;
  std::uint64_t seed = 1;
  std::vector<std::string> mimo_cells;
  std::vector<std::string> deltas;
  std::optional<double> rho;
  std::vector<std::string> vb_cells;
  double epsilon = 1e-4;
  long max_iter = 100000;
  double time_limit = 0.0;
  int workers = 0;
  std::string out;
};

int cmd_bench(const BenchOpts& o) {
  BenchConfig cfg;
  cfg.suite = o.suite;
  cfg.reps = o.reps;
  cfg.seed = o.seed;
  for (const auto& c : o.mimo_cells) {
    const auto v = parse_numbers(c);
    if (v.size() != 4) throw UsageError("--cell for mimo expects m,n,M,snr");
    cfg.mimo_cells.push_back({static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]), v[3]});
  }
  for (const auto& c : o.vb_cells) {
    const auto v = parse_numbers(c);
    if (v.size() != 2) throw UsageError("--cell for vb expects m,n");
    cfg.vb_cells.push_back({static_cast<int>(v[0]), static_cast<int>(v[1])});
  }
  if (!o.mimo_cells.empty() && o.suite != "mimo") throw UsageError("--mimo-cell requires --suite mimo");
  if (!o.vb_cells.empty() && o.suite != "vb") throw UsageError("--vb-cell requires --suite vb");
  for (const auto& d : o.deltas) cfg.radar_deltas.push_back(parse_angle(d));
  cfg.radar_rho = o.rho;
  cfg.bb.epsilon = o.epsilon;
  cfg.bb.limits.max_iterations = o.max_iter;
  if (o.time_limit > 0.0) cfg.bb.limits.time_limit_seconds = o.time_limit;
  cfg.workers = o.workers;
  try {
    cfg.apply_defaults();
    cfg.check();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const BenchTable t = run_bench(cfg);
  std::cout << render_table(t);
  if (!o.out.empty()) write_json_file(o.out, bench_to_json(t));
  return kExitOk;
}

int cmd_oracle(const std::string& in, const std::string& out) {
  InstanceFile f;
  Instance inst;
  try {
    f = read_instance_file(in);
    inst = f.materialize();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  const long long size = enumeration_size(inst.problem);
  if (size < 0) throw UsageError("oracle requires discrete arguments and fixed moduli");
  if (size > 10'000'000)
    throw UsageError("oracle enumeration size " + std::to_string(size) + " exceeds the limit of 10000000");
  const OracleResult r = brute_force_parallel(inst.problem);
  Json x = Json::array();
  for (Eigen::Index i = 0; i < r.x.size(); ++i) x.push_back(Json::array({r.x[i].real(), r.x[i].imag()}));
  Json j{{"format", "cqpbb-oracle"},
         {"version", kFormatVersion},
         {"instance_id", instance_id(f)},
         {"points", r.points},
         {"value", r.value},
         {"ObjVal", inst.display(r.value)},
         {"x", x}};
  emit(j, out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Branch and bound for complex quadratic programs with modulus and argument constraints"};
  app.require_subcommand(1);

  GenerateOpts gen;
  auto* g = app.add_subcommand("generate", "Write a seeded instance file");
  g->add_option("kind", gen.kind, "mimo, radar or vb")->required()->check(CLI::IsMember({"mimo", "radar", "vb"}));
  g->add_option("--m", gen.m, "Receive antennas (mimo, vb)");
  g->add_option("--n", gen.n, "Number of variables");
  g->add_option("--mod", gen.mod, "PSK order (mimo)");
  g->add_option("--snr", gen.snr, "SNR in dB (mimo)");
  g->add_option("--seed", gen.seed, "Generator seed");
  g->add_option("--rho", gen.rho, "Clutter correlation (radar); drawn from [0.2, 0.8] if omitted");
  g->add_option("--fdtr", gen.fd_tr, "Normalized Doppler (radar)");
  g->add_option("--delta", gen.delta, "Half-width of each argument interval, e.g. pi/6 (radar)");
  g->add_option("--x0", gen.x0, "Reference code as comma-separated +1/-1 (radar)");
  g->add_option("--power", gen.power, "Comma-separated power limits (vb)");
  g->add_option("--out", gen.out, "Output file (stdout if omitted)");

  SolveOpts sol;
  auto* s = app.add_subcommand("solve", "Solve an instance or one of its relaxations");
  s->add_option("--in", sol.in, "Instance file")->required();
  s->add_option("--epsilon", sol.epsilon, "Absolute optimality tolerance");
  s->add_option("--relaxation", sol.relaxation, "bb, ecsdr or csdr")->check(CLI::IsMember({"bb", "ecsdr", "csdr"}));
  s->add_option("--max-iter", sol.max_iter, "Iteration limit");
  s->add_option("--time-limit", sol.time_limit, "Wall-clock limit in seconds");
  s->add_flag("--verify", sol.verify, "Check the convergence analysis at every iteration");
  s->add_flag("--progress", sol.progress, "Print progress to stderr");
  s->add_option("--out", sol.out, "Result file (stdout if omitted)");

  BenchOpts ben;
  auto* b = app.add_subcommand("bench", "Run a seeded benchmark suite and print the table");
  b->add_option("--suite", ben.suite, "mimo, radar or vb")->check(CLI::IsMember({"mimo", "radar", "vb"}));
  b->add_option("--reps", ben.reps, "Instances per cell");
  b->add_option("--seed", ben.seed, "Seed of the first instance in each cell");
  b->add_option("--mimo-cell", ben.mimo_cells, "Cell m,n,M,snr (repeatable)");
  b->add_option("--delta", ben.deltas, "Argument half-width for radar cells (repeatable)");
  b->add_option("--rho", ben.rho, "Fixed clutter correlation for radar");
  b->add_option("--vb-cell", ben.vb_cells, "Cell m,n (repeatable)");
  b->add_option("--epsilon", ben.epsilon, "Absolute optimality tolerance");
  b->add_option("--max-iter", ben.max_iter, "Iteration limit per run");
  b->add_option("--time-limit", ben.time_limit, "Wall-clock limit per run in seconds");
  b->add_option("--workers", ben.workers, "Worker threads (0: all cores)");
  b->add_option("--out", ben.out, "Write the records and cell means as JSON");

  std::string oracle_in, oracle_out;
  auto* o = app.add_subcommand("oracle", "Brute-force optimum of a discrete instance");
  o->add_option("--in", oracle_in, "Instance file")->required();
  o->add_option("--out", oracle_out, "Output file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*g) return cmd_generate(gen);
    if (*s) return cmd_solve(sol);
    if (*b) return cmd_bench(ben);
    if (*o) return cmd_oracle(oracle_in, oracle_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolve;
  }
  return kExitUsage;
}
