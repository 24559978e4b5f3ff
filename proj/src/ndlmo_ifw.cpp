#include "netdesign/ndlmo_ifw.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include "netdesign/kernels.hpp"
#include "netdesign/shortest_path.hpp"

namespace netdesign {
namespace {

using Clock = std::chrono::steady_clock;

Clock::time_point deadline_for(double budget_s) {
  if (!(budget_s < 1e9)) return Clock::time_point::max();
  return Clock::now() +
         std::chrono::duration_cast<Clock::duration>(
             std::chrono::duration<double>(std::max(0.0, budget_s)));
}

struct Enumeration {
  const NetworkInstance& inst;
  std::span<const double> gradients;
  std::span<const double> prices;

  std::vector<int> order;                  // unfixed arcs, branch order
  std::vector<std::int8_t> assign;         // 0/1 decided, -1 undecided
  std::vector<bool> closed;                // per edge, arcs assigned 0
  std::vector<std::vector<int>> demanded;  // origin index -> demanded nodes
  Clock::time_point deadline;
  bool expired = false;

  double best_value = std::numeric_limits<double>::infinity();
  std::vector<std::int8_t> best_assign;
  std::vector<FlowState> best_flows;

  // Summed in ascending arc order so that equal designs always produce the
  // same floating-point value, independent of the search path.
  double decided_prices() const {
    double total = 0.0;
    for (std::size_t i = 0; i < prices.size(); ++i) {
      if (assign[i] == 1) total += prices[i];
    }
    return total;
  }

  bool routable() const {
    for (int oi = 0; oi < inst.origin_count(); ++oi) {
      if (demanded[oi].empty()) continue;
      auto reach = reachable_from(inst, inst.origins[oi], &closed);
      for (int node : demanded[oi]) {
        if (!std::binary_search(reach.begin(), reach.end(), node)) return false;
      }
    }
    return true;
  }

  // All-or-nothing flows under the current closures, plus their linear cost.
  std::pair<std::vector<FlowState>, double> route() const {
    const std::size_t edges = inst.edges.size();
    std::vector<FlowState> flows;
    flows.reserve(inst.scenarios.size());
    double core = 0.0;
    for (int s = 0; s < inst.scenario_count(); ++s) {
      auto weights = gradients.subspan(static_cast<std::size_t>(s) * edges,
                                       edges);
      flows.push_back(all_or_nothing(inst, weights, &closed, s));
      core += kernels::dot(weights.data(), flows.back().aggregate.data(),
                           edges);
    }
    return {std::move(flows), core};
  }

  void dfs(std::size_t depth, std::vector<FlowState>&& flows, double core) {
    if (expired) return;
    if (Clock::now() >= deadline) {
      expired = true;
      return;
    }
    const double bound = core + decided_prices();
    if (bound >= best_value) return;
    if (depth == order.size()) {
      best_value = bound;
      best_assign = assign;
      best_flows = std::move(flows);
      return;
    }
    const int arc = order[depth];
    const int edge = inst.removable[arc];

    assign[arc] = 0;
    closed[edge] = true;
    if (routable()) {
      auto [child_flows, child_core] = route();
      dfs(depth + 1, std::move(child_flows), child_core);
    }
    closed[edge] = false;

    // Opening the arc leaves the optimistic routing untouched; only the
    // price changes, so the parent's flows carry over.
    assign[arc] = 1;
    dfs(depth + 1, std::move(flows), core);
    assign[arc] = -1;
  }
};

}  // namespace

IfwSolution solve_ifw_lmo(const NetworkInstance& inst,
                          std::span<const double> gradients,
                          std::span<const double> prices,
                          const DesignBounds& bounds,
                          const IfwConfig& config) {
  const std::size_t edges = inst.edges.size();
  const std::size_t arcs = inst.removable.size();
  if (gradients.size() != edges * inst.scenarios.size()) {
    throw std::invalid_argument(
        "ifw oracle needs one edge-weight vector per scenario");
  }
  if (prices.size() != arcs) {
    throw std::invalid_argument("ifw oracle needs one price per removable arc");
  }
  bounds.validate(arcs);
  for (double r : prices) {
    if (!(r >= 0.0)) {
      throw std::invalid_argument(
          "ifw oracle requires nonnegative design prices");
    }
  }

  Enumeration e{inst, gradients, prices, {}, {}, {}, {}, {}};
  e.assign.assign(arcs, -1);
  e.closed.assign(edges, false);
  for (std::size_t i = 0; i < arcs; ++i) {
    if (!bounds.fixed(i)) continue;
    e.assign[i] = static_cast<std::int8_t>(bounds.lower[i]);
    if (bounds.lower[i] == 0) e.closed[inst.removable[i]] = true;
  }
  for (int arc : branch_order(inst, gradients, prices)) {
    if (!bounds.fixed(static_cast<std::size_t>(arc))) e.order.push_back(arc);
  }
  e.demanded.resize(inst.origins.size());
  for (int oi = 0; oi < inst.origin_count(); ++oi) {
    for (int zi = 0; zi < inst.zone_count(); ++zi) {
      for (int s = 0; s < inst.scenario_count(); ++s) {
        if (inst.demand(s, oi, zi) > 0.0) {
          e.demanded[oi].push_back(inst.zones[zi]);
          break;
        }
      }
    }
  }
  e.deadline = deadline_for(config.time_budget_s);

  // The design with every unfixed arc open seeds the incumbent; its routing
  // doubles as the root relaxation. Infeasibility here is final.
  auto [root_flows, root_core] = e.route();
  e.best_assign = e.assign;
  double all_open_prices = 0.0;
  for (std::size_t i = 0; i < arcs; ++i) {
    if (e.best_assign[i] != 0) {
      e.best_assign[i] = 1;
      all_open_prices += prices[i];
    }
  }
  e.best_value = root_core + all_open_prices;
  e.best_flows = root_flows;
  e.dfs(0, std::move(root_flows), root_core);

  IfwSolution sol;
  sol.exact = !e.expired;
  sol.value = e.best_value;
  sol.flows = std::move(e.best_flows);
  sol.design.resize(arcs);
  for (std::size_t i = 0; i < arcs; ++i) {
    sol.design[i] = static_cast<double>(e.best_assign[i]);
  }
  return sol;
}

std::vector<int> branch_order(const NetworkInstance& inst,
                              std::span<const double> gradients,
                              std::span<const double> prices) {
  (void)prices;
  const std::size_t edges = inst.edges.size();
  const int arcs = inst.removable_count();
  std::vector<double> damage(static_cast<std::size_t>(arcs), 0.0);
  std::vector<double> agg(edges);
  std::vector<bool> one_closed(edges, false);
  for (int s = 0; s < inst.scenario_count(); ++s) {
    auto weights =
        gradients.subspan(static_cast<std::size_t>(s) * edges, edges);
    // All-open all-or-nothing aggregate; unreachable pairs contribute
    // nothing (the order is a heuristic, infeasibility is handled later).
    std::fill(agg.begin(), agg.end(), 0.0);
    for (int oi = 0; oi < inst.origin_count(); ++oi) {
      auto tree = dijkstra(inst, weights, inst.origins[oi]);
      for (int zi = 0; zi < inst.zone_count(); ++zi) {
        const double d = inst.demand(s, oi, zi);
        int node = inst.zones[zi];
        if (d <= 0.0 || !tree.reached(node)) continue;
        while (node != tree.root) {
          const int edge = tree.parent_edge[node];
          agg[static_cast<std::size_t>(edge)] += d;
          node = inst.edges[edge].tail;
        }
      }
    }
    for (int r = 0; r < arcs; ++r) {
      const int edge = inst.removable[static_cast<std::size_t>(r)];
      if (agg[static_cast<std::size_t>(edge)] <= 0.0) continue;
      one_closed[static_cast<std::size_t>(edge)] = true;
      auto detour =
          dijkstra(inst, weights, inst.edges[edge].tail, &one_closed);
      one_closed[static_cast<std::size_t>(edge)] = false;
      const double alternative = detour.dist[inst.edges[edge].head];
      damage[static_cast<std::size_t>(r)] +=
          agg[static_cast<std::size_t>(edge)] *
          (alternative - weights[static_cast<std::size_t>(edge)]);
    }
  }
  std::vector<int> order(static_cast<std::size_t>(arcs));
  for (int r = 0; r < arcs; ++r) order[static_cast<std::size_t>(r)] = r;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double da = damage[static_cast<std::size_t>(a)];
    const double db = damage[static_cast<std::size_t>(b)];
    if (da != db) return da > db;
    return a < b;
  });
  return order;
}

void IfwLmo::set_bounds(DesignBounds bounds) {
  bounds.validate(layout_.removable_count);
  bounds_ = std::move(bounds);
}

LmoResult IfwLmo::minimize(std::span<const double> gradient) {
  ++calls_;
  if (gradient.size() != layout_.dimension()) {
    throw std::invalid_argument("gradient size does not match the layout");
  }
  const std::size_t edges = layout_.edge_count;
  std::vector<double> per_scenario(layout_.scenario_count * edges);
  for (std::size_t s = 0; s < layout_.scenario_count; ++s) {
    auto block = gradient.subspan(layout_.flow_offset(s, 0), edges);
    std::copy(block.begin(), block.end(),
              per_scenario.begin() + static_cast<std::ptrdiff_t>(s * edges));
  }
  auto prices = gradient.subspan(layout_.design_offset(),
                                 layout_.removable_count);
  IfwSolution sol =
      solve_ifw_lmo(*inst_, per_scenario, prices, bounds_, config_);
  LmoResult result;
  result.vertex = layout_.pack(sol.flows, sol.design);
  result.value = sol.value;
  result.exact = sol.exact;
  return result;
}

}  // namespace netdesign
