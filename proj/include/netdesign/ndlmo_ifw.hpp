#pragma once

#include <limits>
#include <span>
#include <vector>

#include "netdesign/design_problem.hpp"
#include "netdesign/instance.hpp"

namespace netdesign {

struct IfwConfig {
  // Wall-clock budget for one oracle call; on expiry the best design found
  // so far is returned with exact = false, so no optimality certificate can
  // be derived from the answer.
  double time_budget_s = std::numeric_limits<double>::infinity();
};

// Minimizer of  prices.y + sum_s gradients_s . x_s  over binary designs
// within bounds, with each scenario's flow an all-or-nothing vertex that
// uses only arcs open under the design.
struct IfwSolution {
  std::vector<double> design;    // one entry per removable arc, exactly 0 or 1
  std::vector<FlowState> flows;  // one per scenario; zero flow on closed arcs
  double value = 0.0;
  bool exact = true;
};

/// Exact linear minimization over the mixed-integer design set by
/// depth-first implicit enumeration of the unfixed design variables.
/// `gradients` holds one nonnegative edge-weight vector per scenario
/// (scenario-major, |S|*|E| entries); `prices` >= 0 are the linear design
/// coefficients. Each node's lower bound is the routing cost with every
/// undecided arc open plus the prices of arcs already fixed open —
/// optimistic because opening arcs never hurts routing and prices are
/// nonnegative — and subtrees that cannot beat the incumbent are pruned.
/// The incumbent starts at the design with all unfixed arcs open. Nodes
/// whose closures disconnect a demanded pair are pruned by a reachability
/// check. Throws RoutingInfeasible when even that all-open design cannot
/// route some demanded pair.
IfwSolution solve_ifw_lmo(const NetworkInstance& inst,
                          std::span<const double> gradients,
                          std::span<const double> prices,
                          const DesignBounds& bounds,
                          const IfwConfig& config = {});

/// Branching order for the enumeration: arcs sorted by descending detour
/// damage — the flow an arc carries in the all-open all-or-nothing
/// assignment times the extra distance that flow would travel if the arc
/// closed (infinite when no alternative route exists) — ties by arc index.
/// Arcs carrying no all-open flow sort last. Prices do not enter the
/// estimate; the enumeration bound accounts for them exactly.
std::vector<int> branch_order(const NetworkInstance& inst,
                              std::span<const double> gradients,
                              std::span<const double> prices);

// Oracle adapter over packed design-problem points. Expects the gradient's
// per-destination blocks within a scenario to be identical (the coupled
// objective broadcasts one marginal per scenario) and its design slots to be
// nonnegative; scenario weights are read from each scenario's first block.
class IfwLmo : public Lmo {
 public:
  explicit IfwLmo(const NetworkInstance& inst, IfwConfig config = {})
      : inst_(&inst),
        layout_(ProblemLayout::of(inst)),
        bounds_(DesignBounds::free_box(layout_.removable_count)),
        config_(config) {}

  void set_bounds(DesignBounds bounds);
  const DesignBounds& bounds() const { return bounds_; }
  const ProblemLayout& layout() const { return layout_; }
  long call_count() const { return calls_; }

  LmoResult minimize(std::span<const double> gradient) override;

 private:
  const NetworkInstance* inst_;
  ProblemLayout layout_;
  DesignBounds bounds_;
  IfwConfig config_;
  long calls_ = 0;
};

}  // namespace netdesign
