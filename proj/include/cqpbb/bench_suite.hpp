#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cqpbb/bb.hpp"
#include "cqpbb/io.hpp"

namespace cqpbb {

struct MimoCell {
  int m = 8;
  int n = 6;
  int M = 4;
  double snr_db = 15.0;
};

struct VbCell {
  int m = 5;
  int n = 5;
};

/// A grid of cells, each run on `reps` instances with seeds seed, seed+1, ...
struct BenchConfig {
  std::string suite = "mimo";  // mimo, radar or vb
  int reps = 5;
  std::uint64_t seed = 1;
  std::vector<MimoCell> mimo_cells;
  std::vector<double> radar_deltas;  // half-widths of the argument intervals
  std::optional<double> radar_rho;
  double radar_fd_tr = 0.15;
  std::vector<VbCell> vb_cells;
  BBConfig bb;
  int workers = 0;  // 0: OpenMP default

  /// Fills an empty grid with the suite's default cells.
  void apply_defaults();
  void check() const;
};

struct CellSummary {
  std::string label;
  Json params;
  int reps = 0;
  int failures = 0;     // runs that threw
  int limit_hits = 0;   // iteration or time limit reached
  // Means over the runs that did not throw.
  double objval = 0.0;
  double lbd_e = 0.0;
  double lbd_c = 0.0;
  double cld_gap = 0.0;
  double iterations = 0.0;
  double time = 0.0;
  double time_e = 0.0;
  double time_c = 0.0;
};

struct BenchTable {
  std::string suite;
  std::vector<CellSummary> cells;
  std::vector<ResultRecord> records;  // cell-major, rep-minor
};

/// Instance files of one cell, in rep order.
std::vector<InstanceFile> cell_instances(const BenchConfig& cfg, std::size_t cell);
std::size_t cell_count(const BenchConfig& cfg);

/// Runs every (cell, rep) job on a pool of OpenMP workers; each job owns its
/// instance end to end and results are reduced in job order.
BenchTable run_bench(const BenchConfig& cfg);

Json bench_to_json(const BenchTable& t);
/// Aligned text table: cell, ObjVal, LBdE, LBdC, CldGap, # Iter, Time, TimeE, TimeC.
std::string render_table(const BenchTable& t);

}  // namespace cqpbb
