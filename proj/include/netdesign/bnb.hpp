#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "netdesign/bpcg.hpp"
#include "netdesign/design_problem.hpp"
#include "netdesign/instance.hpp"
#include "netdesign/ndlmo_benders.hpp"
#include "netdesign/ndlmo_ifw.hpp"
#include "netdesign/ndlmo_penalty.hpp"

namespace netdesign {

// Which oracle solves the node relaxations: implicit enumeration over the
// coupled design set, the decoupled penalty relaxation, or the cut-based
// Benders master.
enum class SolveMode { ifw, penalty, benders };

std::string to_string(SolveMode mode);
/// Inverse of to_string; throws std::invalid_argument on unknown names.
SolveMode parse_solve_mode(const std::string& name);

// One line of the run's event stream: node_open / node_close carry the
// node's lower bound, incumbent / upper_bound the incumbent objective,
// lower_bound the global bound. time_s counts from solve start.
struct BnbEvent {
  double time_s = 0.0;
  std::string event;
  double value = 0.0;
};

struct BnbConfig {
  SolveMode mode = SolveMode::ifw;
  // Stop once (UB - LB)/max(UB, 1e-9) <= gap_tol.
  double gap_tol = 0.05;
  double time_limit_s = 600.0;
  long max_nodes = std::numeric_limits<long>::max();
  // A node relaxation stops at the FW gap tolerance
  //   max(node_gap_floor, min(node_gap_scale * global gap, 0.25 * slack))
  // where slack is the node's own headroom to the incumbent, so re-solved
  // nodes tighten geometrically.
  double node_gap_floor = 1e-7;
  double node_gap_scale = 0.1;
  // Incumbent acceptance threshold on the coupling violation. Candidates
  // always re-route on the rounded design, so they satisfy 0 structurally;
  // the gate guards the invariant rather than the common path.
  double violation_tol = 0.01;
  // A node whose relaxation keeps returning integral iterates is re-queued
  // with a tighter tolerance at most this many times, then closed with its
  // last bound folded into the global lower bound.
  int max_node_resolves = 100;
  IfwConfig ifw;          // per-oracle-call budget in IFW mode
  PenaltyConfig penalty;  // penalty weight/power in penalty mode
  BendersConfig benders;  // cut rule, aggregation, budgets in Benders mode
  // Base settings for the node BPCG solves; the gap tolerances are
  // overridden per node by the schedule above.
  BpcgConfig node_bpcg;
  std::function<void(const BnbEvent&)> on_event;
};

struct BnbResult {
  // Incumbent: binary design (one entry per removable arc), one flow per
  // scenario routed only over open arcs, and the true objective
  // prices . y + sum_s p_s * congestion(x_s).
  std::vector<double> design;
  std::vector<FlowState> flows;
  double objective = std::numeric_limits<double>::infinity();
  double lower_bound = -std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  double violation = std::numeric_limits<double>::infinity();
  long nodes = 0;  // processed node relaxations, re-solves included
  double wall_time_s = 0.0;
  bool solved = false;  // final gap <= gap_tol
  long total_lmo_calls = 0;
  long total_bpcg_iterations = 0;
};

/// Index of the design coordinate farthest from integrality — the argmax of
/// min(y_e, 1 - y_e) with ties broken by the lower index — or -1 when every
/// coordinate is within `tol` of 0 or 1.
int most_fractional_arc(std::span<const double> design, double tol = 1e-9);

/// Branch-and-bound over the binary design variables. Nodes fix subsets of
/// the design to 0/1 and solve the continuous relaxation with BPCG over the
/// mode's oracle; certified relaxations tighten the node bound to
/// objective - dual gap. Fractional iterates branch on the most fractional
/// coordinate; every iterate also seeds a rounding heuristic (threshold at
/// 0.5, re-route each scenario over the open arcs) that updates the
/// incumbent. Nodes are explored best-bound first with FIFO tie-breaking,
/// children inherit the parent's active set filtered to their box, and in
/// Benders mode learned feasibility cuts persist for the whole tree.
/// Throws RoutingInfeasible when no design routes all demand (the all-open
/// check at the root) and std::invalid_argument on nonsensical settings.
BnbResult solve_design_bnb(const NetworkInstance& inst,
                           const BnbConfig& config = {});

}  // namespace netdesign
