#pragma once

#include <span>
#include <vector>

#include "netdesign/instance.hpp"

namespace netdesign {

// Single-source (or single-target) shortest-path tree. Unreachable nodes
// carry +infinity and parent edge -1.
struct ShortestPathTree {
  int root = 0;
  std::vector<double> dist;
  std::vector<int> parent_edge;  // forward: edge into the node;
                                 // reverse: edge out of the node

  bool reached(int node) const { return parent_edge[node] >= 0 || node == root; }
};

// Deterministic tie-breaking throughout: the queue pops by (distance, node
// index), edges relax in ascending edge-index order, and relaxations use
// strict improvement, so equal-cost alternatives never replace an
// established parent. Equal inputs therefore give identical trees.

/// Shortest paths from `origin` over open edges; `closed` (optional, size E)
/// marks edges treated as absent. Weights must be nonnegative.
ShortestPathTree dijkstra(const NetworkInstance& inst,
                          std::span<const double> weights, int origin,
                          const std::vector<bool>* closed = nullptr);

/// Shortest paths from every node *to* `target` (search along reversed
/// edges); parent_edge[v] is the first edge of the v -> target path.
ShortestPathTree dijkstra_to(const NetworkInstance& inst,
                             std::span<const double> weights, int target,
                             const std::vector<bool>* closed = nullptr);

/// Nodes reachable from `origin` through open edges, sorted ascending.
/// Certificate container for infeasibility reporting and cut generation.
std::vector<int> reachable_from(const NetworkInstance& inst, int origin,
                                const std::vector<bool>* closed = nullptr);

/// All-or-nothing assignment: one Dijkstra tree per origin, every demand
/// routed along its tree path. Returns an extreme point of the flow set
/// whose linear cost is sum_{o,z} d_o^z * dist_o(z). Throws
/// RoutingInfeasible (with the reachable-set certificate) when a demanded
/// pair cannot be routed.
FlowState all_or_nothing(const NetworkInstance& inst,
                         std::span<const double> weights,
                         const std::vector<bool>* closed = nullptr,
                         int scenario = 0);

/// Like all_or_nothing but with destination-specific edge weights
/// (weights_per_zone[z] has size E): one reverse Dijkstra per zone. Needed
/// when penalty terms make the linearized cost depend on the destination.
FlowState all_or_nothing_per_zone(
    const NetworkInstance& inst,
    const std::vector<std::vector<double>>& weights_per_zone,
    const std::vector<bool>* closed = nullptr, int scenario = 0);

}  // namespace netdesign
