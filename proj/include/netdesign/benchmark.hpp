#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "netdesign/run.hpp"

namespace netdesign {

// One cell of a benchmark matrix: which instance to solve, with which node
// oracle, under which budgets.
struct BenchmarkRun {
  std::string instance;  // instance JSON path
  SolveMode mode = SolveMode::ifw;
  double gap_target = 0.05;
  double violation_target = 0.01;
  double time_limit_s = 600.0;
};

// Outcome of one cell. `scenarios` comes from the loaded instance and
// `time_s` is the run's wall time — the time to solution when solved. A
// failed run keeps its error text and NaN numbers; the sweep continues.
struct BenchmarkRow {
  std::string instance;
  std::string mode;
  int scenarios = 0;
  bool solved = false;
  double time_s = 0.0;
  double objective = 0.0;
  double gap = 0.0;
  std::string error;
};

// One step of a mode's instances-solved-versus-time curve.
struct CumulativePoint {
  std::string mode;
  double time_s = 0.0;
  long solved = 0;
};

/// Parses {"defaults": {...}, "runs": [{...}, ...]}. Recognized keys in both
/// places: instance, mode, gap, violation, time_limit_s; defaults fill in
/// whatever a run omits, and every run must end up with an instance path.
/// Throws ParseError on malformed input and std::invalid_argument when the
/// run list is empty.
std::vector<BenchmarkRun> benchmark_matrix_from_json(const nlohmann::json& j);
std::vector<BenchmarkRun> load_benchmark_matrix(const std::string& path);

/// Executes the matrix, up to `threads` cells concurrently. Row order always
/// matches the matrix order; per-run failures are recorded in their row and
/// do not stop the sweep. Throws std::invalid_argument on an empty matrix.
std::vector<BenchmarkRow> run_benchmark(const std::vector<BenchmarkRun>& runs,
                                        int threads);

/// CSV with header `instance,mode,scenarios,solved,time_s,objective,gap,
/// error`; fields containing commas or quotes are double-quoted.
std::string benchmark_rows_to_csv(std::span<const BenchmarkRow> rows);

/// Inverse of benchmark_rows_to_csv. Throws ParseError on a bad header or
/// malformed row; parsed rows re-serialize to the identical CSV.
std::vector<BenchmarkRow> benchmark_rows_from_csv(const std::string& text);

/// Per-mode cumulative solved counts: one point per solved run, sorted by
/// (mode, time). Re-aggregating a parsed CSV reproduces the table exactly.
std::vector<CumulativePoint> cumulative_solved(
    std::span<const BenchmarkRow> rows);

/// CSV with header `mode,time_s,solved`.
std::string cumulative_to_csv(std::span<const CumulativePoint> points);

}  // namespace netdesign
