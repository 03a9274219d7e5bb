#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fastquartic/fast_quartic.hpp"

namespace fq::harness {

struct BenchConfig {
  std::vector<int> n_grid;
  int d = 8;
  double eps = 1e-6;
  std::uint64_t seed = 1;
  /// Instances per grid point, seeds seed, seed + 1, ...
  int repeats = 1;
  std::string kind = "planted";
  /// none, agd or newton
  std::string baseline = "none";
  std::optional<double> eps_aam;
  std::optional<double> rho_min;
  int max_epochs = 200;
  /// Per-instance JSONL traces go to <trace_dir>/n<n>_s<seed>.jsonl when set.
  std::string trace_dir;
};

struct BenchRow {
  int n = 0;
  int d = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  SolveReport report;
  double f_offset = 0.0;
  /// Steps whose returned rho was re-checked against the zeta band.
  int rho_checks = 0;
  int rho_violations = 0;
  std::optional<double> f_star;
  std::optional<double> baseline_f;
  std::optional<int> baseline_iterations;
  std::optional<std::int64_t> baseline_wall_nanos;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  /// Least-squares slope of log(max(1, outer iterations)) against log n.
  std::optional<double> slope;
};

/// Least-squares slope of log y against log x; nullopt with fewer than two distinct x.
std::optional<double> fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Runs the restarted solver on every grid point; a failing instance marks
/// its row and the run continues.
BenchReport run_bench(const BenchConfig& config);

nlohmann::json to_json(const BenchRow& row);
nlohmann::json summary_json(const BenchReport& report);

}  // namespace fq::harness
