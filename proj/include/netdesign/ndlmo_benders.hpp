#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "netdesign/design_problem.hpp"
#include "netdesign/instance.hpp"
#include "netdesign/ndlmo_ifw.hpp"

namespace netdesign {

enum class CutKind { optimality, feasibility, bridge };

// One master constraint over the design variables:
//   optimality:   eta + coeffs . y >= rhs
//   feasibility:  coeffs . y >= rhs
//   bridge:       coeffs . y >= 1   (all coefficients exactly 1)
struct Cut {
  CutKind kind = CutKind::optimality;
  std::vector<std::pair<int, double>> coeffs;  // (arc index, weight), sorted
  double rhs = 0.0;
  bool includes_eta = false;
  int scenario = -1;   // recourse block the eta term refers to; -1 = total
  long iteration = 0;  // generation step, for diagnostics only

  double lhs(std::span<const double> design) const;
};

// Append-only cut store with structural deduplication (kind, coefficients,
// rhs, and scenario tag all equal). Iteration stamps do not participate in
// identity.
class CutPool {
 public:
  /// Stores the cut unless an identical one is already present; returns
  /// whether it was stored.
  bool add(Cut cut);
  const std::vector<Cut>& cuts() const { return cuts_; }
  std::size_t size() const { return cuts_.size(); }
  /// Debug dump: JSON array of {kind, coeffs, rhs, scenario, iteration}.
  std::string to_json() const;

 private:
  std::vector<Cut> cuts_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> by_fingerprint_;
};

// How dual values for the coupling rows are constructed.
//  - lp: potentials are shortest-path distances to the destination with
//    closed arcs priced out, and each closed arc's coefficient is
//    M^z * max(0, phi_tail - phi_head - w), the exact LP dual slack. Cuts
//    are valid lower bounds for every design (weak duality).
//  - unit: the reference recipe — coefficient 1.0 on every closed arc,
//    0 on open ones, no M scaling. Cheaper but NOT always valid; see the
//    counterexample test. Kept for comparison, not used by default.
enum class DualRule { lp, unit };

// Duals of one scenario's routing subproblem at a fixed design.
struct DualValues {
  double value = 0.0;  // sum_{o,z} d_o^z * potential_o^z = routing cost
  std::vector<double> origin_potentials;  // [zone * O + origin_index]
  std::vector<double> cut_coeffs;         // [zone * R + arc]: y coefficient
};

// Witness that some demanded pair cannot be routed under a design.
struct InfeasibilityCertificate {
  int origin = 0;              // 0-based origin node
  int zone_index = 0;          // index into inst.zones
  std::vector<int> reachable;  // sorted 0-based nodes reachable from origin
};

using DualOutcome = std::variant<DualValues, InfeasibilityCertificate>;

/// Solves the dual of one scenario's shortest-path routing at a binary
/// design: potentials for every node (finite even where the closed graph
/// disconnects, via a penalized second pass that keeps them dual-feasible)
/// and per-(zone, arc) cut coefficients per the chosen rule. Returns the
/// certificate branch when a demanded origin cannot reach its zone.
DualOutcome dual_subproblem(const NetworkInstance& inst,
                            std::span<const double> weights,
                            std::span<const double> design, int scenario,
                            DualRule rule = DualRule::lp);

/// eta + sum_arcs (sum over scenarios and zones of coefficients) . y >=
/// sum over scenarios of dual values. Pass all scenarios' duals for the
/// aggregated (single-eta) form, or one scenario with its tag for the
/// multi-cut form. Zero coefficients are dropped.
Cut make_optimality_cut(const NetworkInstance& inst,
                        std::span<const DualValues> per_scenario,
                        int scenario_tag = -1);

/// Dual-ray feasibility cut from a disconnection witness: the arcs leaving
/// the reachable set, weighted M^z each, must move at least the demand
/// stranded inside:  sum_{crossing e} M^z y_e >= sum_{stranded origins} d^z.
/// Empty when some crossing arc is open or permanent (then the certificate
/// is stale — the design is not actually disconnected there).
std::optional<Cut> make_feasibility_cut(const NetworkInstance& inst,
                                        const InfeasibilityCertificate& cert,
                                        int scenario);

/// Combinatorial cut sum_{e in frontier set} y_e >= 1. steps = 1 uses the
/// arcs crossing out of the reachable set; larger step counts also include
/// closed removable arcs whose tails are heads of arcs already in the set,
/// grown steps-1 times (a weaker but more robust cut). Empty when a
/// crossing arc is open or permanent.
std::optional<Cut> make_bridge_cut(const NetworkInstance& inst,
                                   const InfeasibilityCertificate& cert,
                                   std::span<const double> design, int steps);

struct BendersConfig {
  DualRule rule = DualRule::lp;
  int bridge_steps = 2;
  // Multi-cut mode keeps one recourse variable per scenario instead of a
  // single aggregated eta.
  bool multi_cut = false;
  long max_iterations = 10000;
  double time_budget_s = std::numeric_limits<double>::infinity();
  // Stop once master value >= candidate value - tolerance*(1+|candidate|).
  double tolerance = 1e-9;
  // Observer invoked for every cut accepted into the working pools, along
  // with the master candidate design whose subproblems produced it.
  std::function<void(const Cut&, std::span<const double>)> on_cut;
};

// Per-iteration progress, mainly for tests and diagnostics.
struct BendersTrace {
  std::vector<double> master_values;
  // r.y + true recourse of the master's candidate; +infinity when the
  // candidate turned out infeasible and produced cuts instead.
  std::vector<double> candidate_values;
};

/// Same contract as solve_ifw_lmo, computed by Benders decomposition:
/// alternate between an exact master (implicit enumeration over y with eta
/// set to the tightest cut-implied bound) and shortest-path dual
/// subproblems that strengthen the pool. `pool` carries design-feasibility
/// knowledge (feasibility and bridge cuts) across calls; optimality cuts
/// depend on the current gradient and live only within this call.
IfwSolution solve_benders_lmo(const NetworkInstance& inst,
                              std::span<const double> gradients,
                              std::span<const double> prices,
                              const DesignBounds& bounds, CutPool& pool,
                              const BendersConfig& config = {},
                              BendersTrace* trace = nullptr);

// Oracle adapter mirroring IfwLmo, with a persistent cut pool shared by
// successive minimize() calls (and copyable into branch-and-bound children
// together with the bounds).
class BendersLmo : public Lmo {
 public:
  explicit BendersLmo(const NetworkInstance& inst, BendersConfig config = {})
      : inst_(&inst),
        layout_(ProblemLayout::of(inst)),
        bounds_(DesignBounds::free_box(layout_.removable_count)),
        config_(std::move(config)) {}

  void set_bounds(DesignBounds bounds);
  const DesignBounds& bounds() const { return bounds_; }
  const ProblemLayout& layout() const { return layout_; }
  CutPool& pool() { return pool_; }
  const CutPool& pool() const { return pool_; }
  void set_pool(CutPool pool) { pool_ = std::move(pool); }
  long call_count() const { return calls_; }

  LmoResult minimize(std::span<const double> gradient) override;

 private:
  const NetworkInstance* inst_;
  ProblemLayout layout_;
  DesignBounds bounds_;
  BendersConfig config_;
  CutPool pool_;
  long calls_ = 0;
};

}  // namespace netdesign
