#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cqpbb/model.hpp"

namespace cqpbb {

/// Maximum-likelihood detection: min ||H x - r||^2 / 2 over M-PSK symbols.
struct MimoSpec {
  int m = 8;  // receive antennas
  int n = 6;  // transmit antennas
  int M = 4;  // PSK order
  double snr_db = 15.0;
  std::uint64_t seed = 1;

  void check() const;
};

/// Unimodular radar code design with a similarity constraint around x0.
struct RadarSpec {
  int n = 7;
  std::optional<double> rho;  // drawn uniformly from [0.2, 0.8] when unset
  double fd_tr = 0.15;        // normalized Doppler
  double delta_angle = kPi / 6.0;  // half-width of each argument interval
  std::vector<double> x0;     // reference code (+1/-1); Barker-7 when empty and n = 7
  std::uint64_t seed = 1;

  void check() const;
};

/// Received-power maximization under per-antenna power limits.
struct VbSpec {
  int m = 5;  // receive antennas
  int n = 5;  // transmit antennas
  std::vector<double> power;  // per-antenna limits, all 1 when empty
  std::uint64_t seed = 1;

  void check() const;
};

/// Exhaustive minimum of a fully discrete, fixed-modulus problem.
struct OracleResult {
  double value = 0.0;
  ComplexVector x;
  long long points = 0;
};

/// Generated problem plus what is known about it. Reported values are shown
/// as display_scale * F + display_offset (the application's own objective).
struct Instance {
  std::string family;  // "mimo", "radar" or "vb"
  ProblemCQP problem;
  ComplexVector planted;  // MIMO only
  double rho = 0.0;       // radar only
  double display_scale = 1.0;
  double display_offset = 0.0;

  double display(double f) const { return display_scale * f + display_offset; }
};

/// H, x* and v are complex Gaussian; x* has uniform M-PSK symbols; sigma is
/// solved from snr_db = 10 log10(||H x*||^2 / (sigma^2 n)) and r = H x* + sigma v.
/// Q = H^H H, c = -H^H r; display_offset = ||r||^2 / 2.
Instance gen_mimo(const MimoSpec& spec);

/// Q = -2 (R^-1 .* (p p^H)^*) with R_ij = rho^|i-j| and p_k = exp(2 pi i fd_tr k);
/// unit modulus; A_i = [arg x0_i - delta, arg x0_i + delta]. Displayed value
/// is the SNR x^H (R^-1 .* (p p^H)^*) x = -F.
Instance gen_radar(const RadarSpec& spec);

/// Q = -2 sum_j h_j h_j^H over m Gaussian channels; 0 <= |x_i| <= sqrt(P_i),
/// full-circle arguments. Displayed value is the received power -F.
Instance gen_vb(const VbSpec& spec);

/// Length-7 Barker code.
std::vector<double> barker7();

/// Number of points enumerated by brute_force, or -1 if the problem is not
/// fully discrete with fixed moduli.
long long enumeration_size(const ProblemCQP& p);

/// Enumerates every feasible point (first coordinate most significant) and
/// returns the minimum and its lexicographically first minimizer. Throws
/// std::invalid_argument if a set is not discrete, a modulus is not fixed,
/// or there are more than max_points points.
OracleResult brute_force_serial(const ProblemCQP& p, long long max_points = 10'000'000);
/// Same result as brute_force_serial, split across OpenMP threads with an
/// ordered reduction.
OracleResult brute_force_parallel(const ProblemCQP& p, long long max_points = 10'000'000);

}  // namespace cqpbb
