#include "cqpbb/bench_suite.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <omp.h>

namespace cqpbb {

void BenchConfig::apply_defaults() {
  if (suite == "mimo" && mimo_cells.empty()) mimo_cells = {{8, 6, 4, 5.0}, {8, 6, 4, 15.0}};
  if (suite == "radar" && radar_deltas.empty()) radar_deltas = {kPi / 6.0, kPi / 3.0};
  if (suite == "vb" && vb_cells.empty()) vb_cells = {{5, 5}, {10, 5}};
}

void BenchConfig::check() const {
  if (suite != "mimo" && suite != "radar" && suite != "vb")
    throw std::invalid_argument("unknown suite '" + suite + "' (expected mimo, radar or vb)");
  if (reps < 0) throw std::invalid_argument("reps must be nonnegative");
  if (workers < 0) throw std::invalid_argument("workers must be nonnegative");
  bb.check();
}

std::size_t cell_count(const BenchConfig& cfg) {
  if (cfg.suite == "mimo") return cfg.mimo_cells.size();
  if (cfg.suite == "radar") return cfg.radar_deltas.size();
  return cfg.vb_cells.size();
}

namespace {

std::string cell_label(const BenchConfig& cfg, std::size_t c) {
  char buf[96];
  if (cfg.suite == "mimo") {
    const auto& m = cfg.mimo_cells[c];
    std::snprintf(buf, sizeof buf, "(%d, %d, %d) snr=%g", m.m, m.n, m.M, m.snr_db);
  } else if (cfg.suite == "radar") {
    std::snprintf(buf, sizeof buf, "omega=%.4f", 2.0 * cfg.radar_deltas[c]);
  } else {
    std::snprintf(buf, sizeof buf, "(%d, %d)", cfg.vb_cells[c].m, cfg.vb_cells[c].n);
  }
  return buf;
}

Json cell_params(const BenchConfig& cfg, std::size_t c) {
  if (cfg.suite == "mimo") {
    const auto& m = cfg.mimo_cells[c];
    return Json{{"m", m.m}, {"n", m.n}, {"M", m.M}, {"snr_db", m.snr_db}};
  }
  if (cfg.suite == "radar") return Json{{"delta_angle", cfg.radar_deltas[c]}, {"omega", 2.0 * cfg.radar_deltas[c]}};
  return Json{{"m", cfg.vb_cells[c].m}, {"n", cfg.vb_cells[c].n}};
}

double mean_or_nan(double sum, int count) { return count > 0 ? sum / count : std::nan(""); }

}  // namespace

std::vector<InstanceFile> cell_instances(const BenchConfig& cfg, std::size_t cell) {
  std::vector<InstanceFile> out;
  for (int rep = 0; rep < cfg.reps; ++rep) {
    InstanceFile f;
    f.kind = cfg.suite;
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(rep);
    if (cfg.suite == "mimo") {
      const auto& m = cfg.mimo_cells[cell];
      f.mimo = {m.m, m.n, m.M, m.snr_db, seed};
    } else if (cfg.suite == "radar") {
      f.radar.rho = cfg.radar_rho;
      f.radar.fd_tr = cfg.radar_fd_tr;
      f.radar.delta_angle = cfg.radar_deltas[cell];
      f.radar.seed = seed;
    } else {
      f.vb.m = cfg.vb_cells[cell].m;
      f.vb.n = cfg.vb_cells[cell].n;
      f.vb.seed = seed;
    }
    out.push_back(std::move(f));
  }
  return out;
}

BenchTable run_bench(const BenchConfig& cfg_in) {
  BenchConfig cfg = cfg_in;
  cfg.apply_defaults();
  cfg.check();
  BBConfig bb = cfg.bb;
  bb.progress = nullptr;
  bb.parallel_children = false;  // the pool already uses every core

  struct Job {
    std::size_t cell;
    InstanceFile file;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cell_count(cfg); ++c) {
    for (auto& f : cell_instances(cfg, c)) jobs.push_back({c, std::move(f)});
  }

  std::vector<ResultRecord> records(jobs.size());
  std::vector<std::string> errors(jobs.size());
  const int threads = cfg.workers > 0 ? cfg.workers : omp_get_max_threads();
  const long njobs = static_cast<long>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long k = 0; k < njobs; ++k) {
    try {
      const Instance inst = jobs[k].file.materialize();
      const RunReport rep = run(inst.problem, bb);
      records[k] = record_from_run(jobs[k].file, inst, rep, bb);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }

  BenchTable t;
  t.suite = cfg.suite;
  for (std::size_t c = 0; c < cell_count(cfg); ++c) {
    CellSummary s;
    s.label = cell_label(cfg, c);
    s.params = cell_params(cfg, c);
    int ok = 0;
    double sums[8] = {};
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      if (jobs[k].cell != c) continue;
      ++s.reps;
      if (!errors[k].empty()) {
        ++s.failures;
        ResultRecord failed;
        failed.instance_id = instance_id(jobs[k].file);
        failed.kind = jobs[k].file.kind;
        failed.spec = instance_to_json(jobs[k].file);
        failed.mode = "bb";
        failed.status = "failed: " + errors[k];
        const double nan = std::nan("");
        failed.objval = failed.lbd_e = failed.lbd_c = failed.cld_gap = failed.final_lower = failed.k_bound = nan;
        records[k] = std::move(failed);
        continue;
      }
      const auto& r = records[k];
      if (r.status != to_string(RunStatus::EpsilonOptimal)) ++s.limit_hits;
      ++ok;
      const double vals[8] = {r.objval, r.lbd_e, r.lbd_c, r.cld_gap, static_cast<double>(r.iterations),
                              r.time_total, r.time_e, r.time_c};
      for (int i = 0; i < 8; ++i) sums[i] += vals[i];
    }
    s.objval = mean_or_nan(sums[0], ok);
    s.lbd_e = mean_or_nan(sums[1], ok);
    s.lbd_c = mean_or_nan(sums[2], ok);
    s.cld_gap = mean_or_nan(sums[3], ok);
    s.iterations = mean_or_nan(sums[4], ok);
    s.time = mean_or_nan(sums[5], ok);
    s.time_e = mean_or_nan(sums[6], ok);
    s.time_c = mean_or_nan(sums[7], ok);
    t.cells.push_back(std::move(s));
  }
  t.records = std::move(records);
  return t;
}

Json bench_to_json(const BenchTable& t) {
  auto num = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  Json cells = Json::array();
  for (const auto& s : t.cells) {
    cells.push_back(Json{{"cell", s.label},
                         {"params", s.params},
                         {"reps", s.reps},
                         {"failures", s.failures},
                         {"limit_hits", s.limit_hits},
                         {"ObjVal", num(s.objval)},
                         {"LBdE", num(s.lbd_e)},
                         {"LBdC", num(s.lbd_c)},
                         {"CldGap", num(s.cld_gap)},
                         {"Iter", num(s.iterations)},
                         {"Time", num(s.time)},
                         {"TimeE", num(s.time_e)},
                         {"TimeC", num(s.time_c)}});
  }
  Json recs = Json::array();
  for (const auto& r : t.records) recs.push_back(record_to_json(r));
  return Json{{"format", "cqpbb-bench"}, {"version", kFormatVersion}, {"suite", t.suite}, {"cells", cells},
              {"records", recs}};
}

std::string render_table(const BenchTable& t) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-24s %12s %12s %12s %8s %8s %9s %9s %9s %s\n", "cell", "ObjVal", "LBdE", "LBdC",
                "CldGap", "# Iter", "Time", "TimeE", "TimeC", "flags");
  os << line;
  for (const auto& s : t.cells) {
    std::string flags;
    if (s.failures > 0) flags += std::to_string(s.failures) + " failed ";
    if (s.limit_hits > 0) flags += std::to_string(s.limit_hits) + " at limit";
    std::snprintf(line, sizeof line, "%-24s %12.4f %12.4f %12.4f %7.1f%% %8.1f %9.3f %9.4f %9.4f %s\n",
                  s.label.c_str(), s.objval, s.lbd_e, s.lbd_c, s.cld_gap, s.iterations, s.time, s.time_e, s.time_c,
                  flags.c_str());
    os << line;
  }
  return os.str();
}

}  // namespace cqpbb
