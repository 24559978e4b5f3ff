#include "netdesign/shortest_path.hpp"

#include <limits>
#include <queue>
#include <stdexcept>
#include <utility>

#include "netdesign/errors.hpp"

namespace netdesign {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_weights(const NetworkInstance& inst,
                   std::span<const double> weights) {
  if (static_cast<int>(weights.size()) != inst.edge_count())
    throw std::invalid_argument("weight vector size must match edge count");
  for (double w : weights)
    if (!(w >= 0.0))
      throw std::invalid_argument("edge weights must be nonnegative");
}

// Generic Dijkstra; Adjacency yields (edge id, neighbor) pairs for a node.
template <typename Adjacency>
ShortestPathTree run_dijkstra(int node_count, int root,
                              std::span<const double> weights,
                              const std::vector<bool>* closed,
                              Adjacency adjacency) {
  ShortestPathTree tree;
  tree.root = root;
  tree.dist.assign(static_cast<std::size_t>(node_count), kInf);
  tree.parent_edge.assign(static_cast<std::size_t>(node_count), -1);
  tree.dist[root] = 0.0;

  using Entry = std::pair<double, int>;  // (distance, node): deterministic pops
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  queue.push({0.0, root});
  std::vector<bool> settled(static_cast<std::size_t>(node_count), false);

  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (settled[u]) continue;
    settled[u] = true;
    adjacency(u, [&](int e, int v) {
      if (closed != nullptr && (*closed)[e]) return;
      double candidate = d + weights[e];
      if (candidate < tree.dist[v]) {  // strict: ties keep the first parent
        tree.dist[v] = candidate;
        tree.parent_edge[v] = e;
        queue.push({candidate, v});
      }
    });
  }
  return tree;
}

}  // namespace

ShortestPathTree dijkstra(const NetworkInstance& inst,
                          std::span<const double> weights, int origin,
                          const std::vector<bool>* closed) {
  check_weights(inst, weights);
  return run_dijkstra(inst.node_count, origin, weights, closed,
                      [&](int u, auto&& visit) {
                        for (int e : inst.edges_out(u))
                          visit(e, inst.edges[e].head);
                      });
}

ShortestPathTree dijkstra_to(const NetworkInstance& inst,
                             std::span<const double> weights, int target,
                             const std::vector<bool>* closed) {
  check_weights(inst, weights);
  return run_dijkstra(inst.node_count, target, weights, closed,
                      [&](int u, auto&& visit) {
                        for (int e : inst.edges_in(u))
                          visit(e, inst.edges[e].tail);
                      });
}

std::vector<int> reachable_from(const NetworkInstance& inst, int origin,
                                const std::vector<bool>* closed) {
  std::vector<bool> seen(static_cast<std::size_t>(inst.node_count), false);
  seen[origin] = true;
  std::vector<int> stack{origin};
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int e : inst.edges_out(u)) {
      if (closed != nullptr && (*closed)[e]) continue;
      int v = inst.edges[e].head;
      if (!seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  std::vector<int> nodes;
  for (int n = 0; n < inst.node_count; ++n)
    if (seen[n]) nodes.push_back(n);
  return nodes;
}

namespace {

[[noreturn]] void throw_infeasible(const NetworkInstance& inst, int origin,
                                   int zone_node, int scenario,
                                   const std::vector<bool>* closed) {
  std::vector<int> reachable = reachable_from(inst, origin, closed);
  for (int& n : reachable) ++n;  // report 1-based ids
  throw RoutingInfeasible(origin + 1, zone_node + 1,
                          inst.scenario_count() > 1 ? scenario : -1,
                          std::move(reachable));
}

}  // namespace

FlowState all_or_nothing(const NetworkInstance& inst,
                         std::span<const double> weights,
                         const std::vector<bool>* closed, int scenario) {
  const int E = inst.edge_count();
  const int Z = inst.zone_count();
  FlowState flow;
  flow.per_destination.assign(static_cast<std::size_t>(Z) * E, 0.0);

  for (int oi = 0; oi < inst.origin_count(); ++oi) {
    int origin = inst.origins[oi];
    ShortestPathTree tree = dijkstra(inst, weights, origin, closed);
    for (int zi = 0; zi < Z; ++zi) {
      double d = inst.demand(scenario, oi, zi);
      if (d <= 0.0) continue;
      int zone_node = inst.zones[zi];
      if (zone_node != origin && !tree.reached(zone_node))
        throw_infeasible(inst, origin, zone_node, scenario, closed);
      double* xz = flow.per_destination.data() +
                   static_cast<std::size_t>(zi) * E;
      for (int v = zone_node; v != origin;) {
        int e = tree.parent_edge[v];
        xz[e] += d;
        v = inst.edges[e].tail;
      }
    }
  }
  flow.recompute_aggregate(Z, E);
  return flow;
}

FlowState all_or_nothing_per_zone(
    const NetworkInstance& inst,
    const std::vector<std::vector<double>>& weights_per_zone,
    const std::vector<bool>* closed, int scenario) {
  const int E = inst.edge_count();
  const int Z = inst.zone_count();
  if (static_cast<int>(weights_per_zone.size()) != Z)
    throw std::invalid_argument("need one weight vector per zone");
  FlowState flow;
  flow.per_destination.assign(static_cast<std::size_t>(Z) * E, 0.0);

  for (int zi = 0; zi < Z; ++zi) {
    int zone_node = inst.zones[zi];
    ShortestPathTree tree =
        dijkstra_to(inst, weights_per_zone[zi], zone_node, closed);
    double* xz =
        flow.per_destination.data() + static_cast<std::size_t>(zi) * E;
    for (int oi = 0; oi < inst.origin_count(); ++oi) {
      double d = inst.demand(scenario, oi, zi);
      if (d <= 0.0) continue;
      int origin = inst.origins[oi];
      if (origin != zone_node && !tree.reached(origin))
        throw_infeasible(inst, origin, zone_node, scenario, closed);
      for (int v = origin; v != zone_node;) {
        int e = tree.parent_edge[v];
        xz[e] += d;
        v = inst.edges[e].head;
      }
    }
  }
  flow.recompute_aggregate(Z, E);
  return flow;
}

}  // namespace netdesign
