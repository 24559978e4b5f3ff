#pragma once

#include <limits>
#include <span>
#include <vector>

#include "netdesign/instance.hpp"

namespace netdesign::testing {

// Brute-force references for small graphs. Deliberately simple and slow:
// these are the ground truth the fast implementations are tested against.

/// Minimum total weight over all simple paths from `from` to `to`
/// (+infinity when no path exists). Exhaustive DFS.
inline double min_path_weight(const NetworkInstance& inst,
                              std::span<const double> weights, int from,
                              int to,
                              const std::vector<bool>* closed = nullptr) {
  if (from == to) return 0.0;
  std::vector<bool> on_path(static_cast<std::size_t>(inst.node_count), false);
  double best = std::numeric_limits<double>::infinity();
  auto dfs = [&](auto&& self, int u, double cost) -> void {
    if (cost >= best) return;
    if (u == to) {
      best = cost;
      return;
    }
    on_path[u] = true;
    for (int e : inst.edges_out(u)) {
      if (closed != nullptr && (*closed)[e]) continue;
      int v = inst.edges[e].head;
      if (!on_path[v]) self(self, v, cost + weights[e]);
    }
    on_path[u] = false;
  };
  dfs(dfs, from, 0.0);
  return best;
}

/// Exhaustive-path LP bound: the minimum linear cost of routing all demands
/// of one scenario, sum_{o,z} d_o^z * (cheapest path weight).
inline double min_linear_routing_cost(const NetworkInstance& inst,
                                      std::span<const double> weights,
                                      const std::vector<bool>* closed = nullptr,
                                      int scenario = 0) {
  double total = 0.0;
  for (int oi = 0; oi < inst.origin_count(); ++oi) {
    for (int zi = 0; zi < inst.zone_count(); ++zi) {
      double d = inst.demand(scenario, oi, zi);
      if (d <= 0.0) continue;
      total += d * min_path_weight(inst, weights, inst.origins[oi],
                                   inst.zones[zi], closed);
    }
  }
  return total;
}

}  // namespace netdesign::testing
