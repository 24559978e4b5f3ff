#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "netdesign/bnb.hpp"
#include "netdesign/instance.hpp"

namespace netdesign {

// One solver invocation as driven from the command line or a benchmark
// matrix: where the instance lives, which oracle runs the node relaxations,
// and when to stop.
struct RunConfig {
  std::string instance_path;
  SolveMode mode = SolveMode::ifw;
  double gap_target = 0.05;        // relative duality gap declaring success
  double violation_target = 0.01;  // incumbent coupling-violation ceiling
  double time_limit_s = 600.0;
  std::uint64_t seed = 0;  // recorded in outputs; solves are deterministic
  int threads = 1;         // benchmark-matrix parallelism
  std::string output_dir = ".";
};

/// Throws std::invalid_argument unless gap_target lies in (0,1), the
/// violation target is nonnegative, the time limit is positive and the
/// thread count is at least 1.
void validate(const RunConfig& cfg);

struct RunOutcome {
  BnbResult result;
  std::vector<BnbEvent> events;  // in emission order
};

/// Translates the run configuration into branch-and-bound settings, solves,
/// and collects the event stream.
RunOutcome run_solve(const NetworkInstance& inst, const RunConfig& cfg);

inline constexpr const char* kResultFormatName = "netdesign-result";
inline constexpr int kResultFormatVersion = 1;

/// Canonical result record. Deliberately excludes wall-clock time so that
/// repeated identical runs serialize to identical bytes; timing lives in the
/// event CSV. Non-finite numbers (no incumbent / no bound) become null.
nlohmann::ordered_json result_to_json(const RunConfig& cfg,
                                      const BnbResult& res);

/// result_to_json rendered with 2-space indent and a trailing newline.
std::string write_result(const RunConfig& cfg, const BnbResult& res);

/// Event stream as CSV with header `time_s,event,value`.
std::string events_to_csv(std::span<const BnbEvent> events);

/// Inverse of events_to_csv. Throws ParseError (with the offending 1-based
/// line) on a bad header or malformed row.
std::vector<BnbEvent> events_from_csv(const std::string& text);

}  // namespace netdesign
