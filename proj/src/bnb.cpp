#include "netdesign/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>

#include "netdesign/errors.hpp"
#include "netdesign/kernels.hpp"
#include "netdesign/traffic_assignment.hpp"

namespace netdesign {

std::string to_string(SolveMode mode) {
  switch (mode) {
    case SolveMode::ifw:
      return "ifw";
    case SolveMode::penalty:
      return "penalty";
    case SolveMode::benders:
      return "benders";
  }
  throw std::invalid_argument("to_string: unknown solve mode");
}

SolveMode parse_solve_mode(const std::string& name) {
  if (name == "ifw") return SolveMode::ifw;
  if (name == "penalty") return SolveMode::penalty;
  if (name == "benders") return SolveMode::benders;
  throw std::invalid_argument("parse_solve_mode: unknown mode \"" + name +
                              "\" (expected ifw, penalty, or benders)");
}

int most_fractional_arc(std::span<const double> design, double tol) {
  int best = -1;
  double best_score = tol;
  for (std::size_t i = 0; i < design.size(); ++i) {
    double score = std::min(design[i], 1.0 - design[i]);
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(i);
    }
  }
  return best;
}

namespace {

struct Node {
  DesignBounds bounds;
  ActiveSet warm;  // parent vertices still feasible here; may be empty
  double bound = -std::numeric_limits<double>::infinity();
  int depth = 0;
  int resolves = 0;  // completed re-solves after integral iterates
};

// Uniform facade over the three node oracles. A single instance lives for
// the whole run so call counters — and in Benders mode the learned
// feasibility cuts, which are valid for every design — accumulate across
// nodes.
class NodeOracle {
 public:
  NodeOracle(const NetworkInstance& inst, const BnbConfig& cfg) {
    switch (cfg.mode) {
      case SolveMode::ifw:
        ifw_.emplace(inst, cfg.ifw);
        break;
      case SolveMode::penalty:
        penalty_.emplace(inst);
        break;
      case SolveMode::benders:
        benders_.emplace(inst, cfg.benders);
        break;
    }
  }

  Lmo& lmo() {
    if (ifw_) return *ifw_;
    if (penalty_) return *penalty_;
    return *benders_;
  }
  void set_bounds(const DesignBounds& bounds) {
    if (ifw_)
      ifw_->set_bounds(bounds);
    else if (penalty_)
      penalty_->set_bounds(bounds);
    else
      benders_->set_bounds(bounds);
  }
  long calls() const {
    if (ifw_) return ifw_->call_count();
    if (penalty_) return penalty_->call_count();
    return benders_->call_count();
  }

 private:
  std::optional<IfwLmo> ifw_;
  std::optional<PenaltyLmo> penalty_;
  std::optional<BendersLmo> benders_;
};

std::unique_ptr<Objective> make_node_objective(const NetworkInstance& inst,
                                               const BnbConfig& cfg) {
  if (cfg.mode == SolveMode::penalty)
    return std::make_unique<PenalizedDesignObjective>(inst, cfg.penalty);
  return std::make_unique<CoupledDesignObjective>(inst);
}

struct Candidate {
  std::vector<double> design;
  std::vector<FlowState> flows;
  double objective = std::numeric_limits<double>::infinity();
  double violation = std::numeric_limits<double>::infinity();
};

// True constrained value of a (possibly fractional) design: threshold at
// 0.5, re-route every scenario over the arcs left open, price the opened
// arcs. Throws RoutingInfeasible when the rounded design cannot route.
Candidate evaluate_design(const NetworkInstance& inst,
                          std::span<const double> design,
                          const BpcgConfig& ta_cfg) {
  Candidate out;
  out.design.assign(design.begin(), design.end());
  for (double& y : out.design) y = y >= 0.5 ? 1.0 : 0.0;
  std::vector<bool> closed(static_cast<std::size_t>(inst.edge_count()), false);
  for (std::size_t ri = 0; ri < inst.removable.size(); ++ri)
    if (out.design[ri] == 0.0) closed[inst.removable[ri]] = true;
  out.flows.reserve(inst.scenarios.size());
  for (std::size_t s = 0; s < inst.scenarios.size(); ++s)
    out.flows.push_back(
        solve_traffic_assignment(inst, static_cast<int>(s), &closed, ta_cfg)
            .flow);
  out.objective =
      stochastic_objective(inst, out.flows) +
      kernels::dot(inst.prices.data(), out.design.data(), out.design.size());
  out.violation = constraint_violation(inst, out.flows, out.design);
  return out;
}

// Keeps the parent active set's vertices whose design slots satisfy the
// child bounds; weights are renormalized. Vertices carry exact 0/1 design
// entries, so the comparison is a plain threshold.
ActiveSet filter_active_set(const ActiveSet& parent, const ProblemLayout& layout,
                            const DesignBounds& bounds) {
  ActiveSet out;
  for (std::size_t i = 0; i < parent.size(); ++i) {
    std::span<const double> y = layout.design(
        std::span<const double>(parent.vertices[i]));
    bool feasible = true;
    for (std::size_t j = 0; j < bounds.size() && feasible; ++j) {
      if (bounds.lower[j] == 1 && y[j] < 0.5) feasible = false;
      if (bounds.upper[j] == 0 && y[j] >= 0.5) feasible = false;
    }
    if (!feasible) continue;
    out.vertices.push_back(parent.vertices[i]);
    out.weights.push_back(parent.weights[i]);
    out.fingerprints.push_back(parent.fingerprints[i]);
  }
  if (!out.vertices.empty()) out.compact(0.0);
  return out;
}

}  // namespace

BnbResult solve_design_bnb(const NetworkInstance& inst,
                           const BnbConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  if (!(config.gap_tol >= 0.0))
    throw std::invalid_argument("solve_design_bnb: gap_tol must be >= 0");
  if (!(config.node_gap_floor > 0.0))
    throw std::invalid_argument(
        "solve_design_bnb: node_gap_floor must be > 0");
  if (!(config.node_gap_scale > 0.0 && config.node_gap_scale <= 1.0))
    throw std::invalid_argument(
        "solve_design_bnb: node_gap_scale must be in (0, 1]");
  if (config.max_node_resolves < 1)
    throw std::invalid_argument(
        "solve_design_bnb: max_node_resolves must be >= 1");

  const ProblemLayout layout = ProblemLayout::of(inst);
  const std::size_t R = layout.removable_count;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  auto emit = [&](const char* kind, double value) {
    if (config.on_event) config.on_event(BnbEvent{elapsed(), kind, value});
  };

  // Incumbent re-routing solves to the node floor: incumbents stay valid at
  // any tolerance, the floor just keeps the bound comparisons meaningful.
  BpcgConfig ta_cfg = config.node_bpcg;
  ta_cfg.gap_tol_rel = config.node_gap_floor;
  ta_cfg.gap_tol_abs = 0.0;

  // The all-open design seeds the incumbent; if even that cannot route, the
  // instance is infeasible and the routing error propagates to the caller.
  Candidate best = evaluate_design(inst, std::vector<double>(R, 1.0), ta_cfg);
  emit("incumbent", best.objective);
  emit("upper_bound", best.objective);

  std::unique_ptr<Objective> objective = make_node_objective(inst, config);
  NodeOracle oracle(inst, config);

  // Best-bound-first queue; the sequence number makes ties FIFO and the
  // whole exploration order deterministic.
  std::map<std::pair<double, long>, Node> open;
  long seq = 0;
  {
    Node root;
    root.bounds = DesignBounds::free_box(R);
    open.emplace(std::make_pair(root.bound, seq++), std::move(root));
  }

  // Subtrees closed at their re-solve cap still bound the optimum from
  // below; their floor joins the global bound alongside the open nodes.
  double closed_floor = kInf;
  auto global_lb = [&] {
    double lb = std::min(best.objective, closed_floor);
    if (!open.empty()) lb = std::min(lb, open.begin()->first.first);
    return lb;
  };
  auto rel_gap = [&](double ub, double lb) {
    if (!(lb > -kInf)) return kInf;
    return std::max(0.0, ub - lb) / std::max(ub, 1e-9);
  };

  BnbResult result;
  double published_lb = -kInf;
  while (!open.empty()) {
    double lb_now = global_lb();
    if (lb_now > published_lb) {
      published_lb = lb_now;
      emit("lower_bound", lb_now);
    }
    double gap_now = rel_gap(best.objective, lb_now);
    if (gap_now <= config.gap_tol) break;
    if (elapsed() >= config.time_limit_s || result.nodes >= config.max_nodes)
      break;

    auto it = open.begin();
    Node node = std::move(it->second);
    open.erase(it);
    ++result.nodes;
    emit("node_open", node.bound);

    if (node.bound >= best.objective) {  // inherited bound already meets UB
      emit("node_close", node.bound);
      continue;
    }

    // Tolerance schedule: a slice of the global gap, and for re-solved nodes
    // a quarter of their own remaining headroom, so repeated integral
    // iterates make geometric progress toward fathoming.
    double slack_rel =
        (best.objective - node.bound) / std::max(1.0, best.objective);
    double tol = std::max(config.node_gap_floor,
                          std::min(std::min(gap_now, 1.0) *
                                       config.node_gap_scale,
                                   0.25 * slack_rel));

    BpcgConfig node_cfg = config.node_bpcg;
    node_cfg.gap_tol_rel = tol;
    node_cfg.gap_tol_abs = 0.0;
    node_cfg.time_limit_s =
        std::min(config.node_bpcg.time_limit_s,
                 std::max(config.time_limit_s - elapsed(), 0.0));

    oracle.set_bounds(node.bounds);
    SolveReport report;
    try {
      if (node.warm.size() > 0) {
        report =
            bpcg_solve(*objective, oracle.lmo(), std::move(node.warm),
                       node_cfg);
      } else {
        // Fresh start: probe the gradient at zero flow with the box's most
        // open design and let the oracle produce the first vertex.
        std::vector<double> probe(layout.dimension(), 0.0);
        std::span<double> y = layout.design(std::span<double>(probe));
        for (std::size_t j = 0; j < R; ++j)
          y[j] = static_cast<double>(node.bounds.upper[j]);
        std::vector<double> grad(layout.dimension());
        objective->gradient(probe, grad);
        LmoResult first = oracle.lmo().minimize(grad);
        report = bpcg_solve(*objective, oracle.lmo(),
                            std::move(first.vertex), node_cfg);
      }
    } catch (const RoutingInfeasible&) {
      if (node.depth == 0) throw;  // nothing routes even with every arc open
      emit("node_close", node.bound);
      continue;  // no design inside this box routes all demand
    }
    result.total_bpcg_iterations += report.iterations;

    double node_bound = node.bound;
    if (report.certified)
      node_bound = std::max(node_bound, report.lower_bound);

    // Rounding heuristic on the iterate, in every mode. The re-routed flows
    // respect the rounded closures, so the violation gate holds trivially.
    std::span<const double> y_iterate =
        layout.design(std::span<const double>(report.iterate));
    try {
      Candidate cand = evaluate_design(inst, y_iterate, ta_cfg);
      if (cand.violation <= config.violation_tol &&
          cand.objective < best.objective) {
        best = std::move(cand);
        emit("incumbent", best.objective);
        emit("upper_bound", best.objective);
      }
    } catch (const RoutingInfeasible&) {
      // rounded design does not route; keep the incumbent
    }

    if (node_bound >= best.objective) {
      emit("node_close", node_bound);
      continue;
    }

    int frac = most_fractional_arc(y_iterate);
    if (frac < 0) {
      // Integral iterate: nothing to branch on, but the certified gap was
      // too loose to fathom. Re-queue for a tighter solve; past the cap,
      // close the node and let its bound stand in for the subtree.
      if (node.resolves + 1 >= config.max_node_resolves) {
        closed_floor = std::min(closed_floor, node_bound);
        emit("node_close", node_bound);
      } else {
        node.resolves += 1;
        node.bound = node_bound;
        node.warm = std::move(report.active_set);
        open.emplace(std::make_pair(node_bound, seq++), std::move(node));
      }
      continue;
    }

    Node closed_child;
    closed_child.bounds = node.bounds;
    closed_child.bounds.upper[frac] = 0;
    closed_child.bound = node_bound;
    closed_child.depth = node.depth + 1;
    closed_child.warm =
        filter_active_set(report.active_set, layout, closed_child.bounds);

    Node open_child;
    open_child.bounds = node.bounds;
    open_child.bounds.lower[frac] = 1;
    open_child.bound = node_bound;
    open_child.depth = node.depth + 1;
    open_child.warm =
        filter_active_set(report.active_set, layout, open_child.bounds);

    open.emplace(std::make_pair(closed_child.bound, seq++),
                 std::move(closed_child));
    open.emplace(std::make_pair(open_child.bound, seq++),
                 std::move(open_child));
    emit("node_close", node_bound);
  }

  double lb = global_lb();
  if (lb > published_lb) emit("lower_bound", lb);
  result.design = std::move(best.design);
  result.flows = std::move(best.flows);
  result.objective = best.objective;
  result.lower_bound = lb;
  result.gap = rel_gap(best.objective, lb);
  result.violation = best.violation;
  result.wall_time_s = elapsed();
  result.solved = result.gap <= config.gap_tol;
  result.total_lmo_calls = oracle.calls();
  return result;
}

}  // namespace netdesign
