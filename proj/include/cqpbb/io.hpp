#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cqpbb/apps.hpp"
#include "cqpbb/bb.hpp"
#include "cqpbb/conic.hpp"

namespace cqpbb {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

/// Contents of an instance file: a generator spec (kind mimo, radar or vb)
/// or an explicit problem (kind raw-cqp).
struct InstanceFile {
  std::string kind = "raw-cqp";
  MimoSpec mimo;
  RadarSpec radar;
  VbSpec vb;
  Instance raw;  // used when kind == "raw-cqp"

  /// Runs the generator, or returns the stored problem.
  Instance materialize() const;
};

Json problem_to_json(const ProblemCQP& p);
ProblemCQP problem_from_json(const Json& j);

Json instance_to_json(const InstanceFile& f);
/// Throws std::runtime_error with the offending field on malformed input.
InstanceFile instance_from_json(const Json& j);

InstanceFile read_instance_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);
Json read_json_file(const std::string& path);

/// FNV-1a of the compact serialization, as 16 hex digits.
std::string instance_id(const InstanceFile& f);

/// One solve, in the units of the application (see Instance::display).
struct ResultRecord {
  std::string instance_id;
  std::string kind;
  Json spec;          // instance_to_json of the input
  std::string mode;   // "bb", "ecsdr" or "csdr"
  std::string status;
  double display_scale = 1.0;
  double display_offset = 0.0;
  double objval = 0.0;       // NaN in relaxation modes
  double lbd_e = 0.0;        // NaN when not computed
  double lbd_c = 0.0;
  double cld_gap = 0.0;      // NaN unless mode == "bb" with both bounds
  double final_lower = 0.0;  // bb only
  long iterations = 0;
  long nodes = 0;
  double time_total = 0.0;
  double time_e = 0.0;
  double time_c = 0.0;
  double k_bound = 0.0;
  double epsilon = 0.0;
  std::string config;  // solver and limit settings
  // Solver diagnostics for relaxation modes.
  std::string solver_status;
  int solver_iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double relative_gap = 0.0;
  double min_eig_z = 0.0;
  double min_eig_s = 0.0;
  long verification_failures = 0;
  std::vector<VerificationRecord> verification;
};

ResultRecord record_from_run(const InstanceFile& f, const Instance& inst, const RunReport& rep, const BBConfig& cfg);
ResultRecord record_from_relaxation(const InstanceFile& f, const Instance& inst, RelaxationKind kind,
                                    const RelaxationSolution& s, double seconds, const SolverConfig& cfg);

Json record_to_json(const ResultRecord& r);
ResultRecord record_from_json(const Json& j);

std::string config_fingerprint(const SolverConfig& s);

}  // namespace cqpbb
