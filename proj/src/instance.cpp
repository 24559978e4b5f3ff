#include "netdesign/instance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "netdesign/kernels.hpp"

namespace netdesign {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

// CSR over `key(edge)` for nodes 0..node_count-1; edge order within a bucket
// follows edge index, which keeps all downstream iteration deterministic.
template <typename KeyFn>
void build_csr(int node_count, int edge_count, KeyFn key,
               std::vector<int>& offset, std::vector<int>& ids) {
  offset.assign(static_cast<std::size_t>(node_count) + 1, 0);
  for (int e = 0; e < edge_count; ++e) ++offset[static_cast<std::size_t>(key(e)) + 1];
  for (int n = 0; n < node_count; ++n) offset[n + 1] += offset[n];
  ids.resize(static_cast<std::size_t>(edge_count));
  std::vector<int> cursor(offset.begin(), offset.end() - 1);
  for (int e = 0; e < edge_count; ++e) ids[cursor[key(e)]++] = e;
}

}  // namespace

EdgeCostCoeffs derive_cost_coeffs(const BprRecord& r) {
  EdgeCostCoeffs c;
  c.alpha = r.constant;
  if (r.power > 0.0) {
    c.beta = r.free_flow_time;
    c.gamma = r.free_flow_time * r.b /
              (std::pow(r.capacity, r.power) * (r.power + 1.0));
    c.rho = r.power + 1.0;
  } else {
    // Integral of the constant travel time fft*(1+b).
    c.beta = r.free_flow_time * (1.0 + r.b);
    c.gamma = 0.0;
    c.rho = 2.0;  // inert since gamma = 0
  }
  return c;
}

void NetworkInstance::finalize() {
  require(node_count > 0, "instance has no nodes");
  const int E = edge_count();
  require(E > 0, "instance has no edges");
  for (const Edge& e : edges) {
    require(e.tail >= 0 && e.tail < node_count && e.head >= 0 &&
                e.head < node_count,
            "edge endpoint out of range");
    require(e.tail != e.head, "self-loop edge");
  }
  require(alpha.size() == edges.size() && beta.size() == edges.size() &&
              gamma.size() == edges.size() && rho.size() == edges.size(),
          "cost coefficient arrays must match the edge count");
  for (int e = 0; e < E; ++e) {
    require(std::isfinite(alpha[e]), "alpha must be finite");
    require(beta[e] >= 0.0, "beta must be nonnegative");
    require(gamma[e] >= 0.0, "gamma must be nonnegative");
    require(rho[e] > 1.0, "rho must exceed 1");
  }

  require(!zones.empty(), "instance has no demand zones");
  require(!origins.empty(), "instance has no origins");
  for (int z : zones)
    require(z >= 0 && z < node_count, "zone node out of range");
  for (int o : origins)
    require(o >= 0 && o < node_count, "origin node out of range");
  require(std::is_sorted(zones.begin(), zones.end()) &&
              std::adjacent_find(zones.begin(), zones.end()) == zones.end(),
          "zones must be sorted and unique");
  require(std::is_sorted(origins.begin(), origins.end()) &&
              std::adjacent_find(origins.begin(), origins.end()) ==
                  origins.end(),
          "origins must be sorted and unique");

  require(!scenarios.empty(), "instance needs at least one demand table");
  double prob_sum = 0.0;
  for (const DemandTable& s : scenarios) {
    require(s.demand.size() == zones.size() * origins.size(),
            "demand table size mismatch");
    require(s.zone_total.size() == zones.size(),
            "zone_total size mismatch");
    require(s.probability > 0.0, "scenario probability must be positive");
    prob_sum += s.probability;
    for (double d : s.demand)
      require(d >= 0.0 && std::isfinite(d), "demand must be nonnegative");
    for (std::size_t z = 0; z < zones.size(); ++z) {
      double total = 0.0;
      for (std::size_t o = 0; o < origins.size(); ++o)
        total += s.demand[o * zones.size() + z];
      require(std::abs(total - s.zone_total[z]) <=
                  1e-9 * std::max(1.0, total),
              "zone_total must equal the demand sum into the zone");
      require(s.zone_total[z] > 0.0,
              "every zone needs positive inbound demand in every scenario");
    }
  }
  require(std::abs(prob_sum - 1.0) <= 1e-12,
          "scenario probabilities must sum to 1");

  require(prices.size() == removable.size(),
          "prices must align with the removable set");
  require(std::is_sorted(removable.begin(), removable.end()) &&
              std::adjacent_find(removable.begin(), removable.end()) ==
                  removable.end(),
          "removable set must be sorted and unique");
  for (int e : removable)
    require(e >= 0 && e < E, "removable edge index out of range");
  for (double r : prices) require(r >= 0.0, "prices must be nonnegative");

  alpha_sum = 0.0;
  for (double a : alpha) alpha_sum += a;

  zone_index_of_node.assign(static_cast<std::size_t>(node_count), -1);
  for (std::size_t i = 0; i < zones.size(); ++i)
    zone_index_of_node[zones[i]] = static_cast<int>(i);
  origin_index_of_node.assign(static_cast<std::size_t>(node_count), -1);
  for (std::size_t i = 0; i < origins.size(); ++i)
    origin_index_of_node[origins[i]] = static_cast<int>(i);
  removable_index_of_edge.assign(static_cast<std::size_t>(E), -1);
  for (std::size_t i = 0; i < removable.size(); ++i)
    removable_index_of_edge[removable[i]] = static_cast<int>(i);

  build_csr(node_count, E, [&](int e) { return edges[e].tail; }, out_offset,
            out_edges);
  build_csr(node_count, E, [&](int e) { return edges[e].head; }, in_offset,
            in_edges);
}

void FlowState::recompute_aggregate(int zone_count, int edge_count) {
  aggregate.assign(static_cast<std::size_t>(edge_count), 0.0);
  for (int z = 0; z < zone_count; ++z)
    kernels::add(per_destination.data() +
                     static_cast<std::size_t>(z) * edge_count,
                 aggregate.data(), static_cast<std::size_t>(edge_count));
}

double objective(const NetworkInstance& inst,
                 const std::vector<double>& aggregate_flow) {
  return inst.alpha_sum +
         kernels::edge_cost_sum(aggregate_flow.data(), inst.beta.data(),
                                inst.gamma.data(), inst.rho.data(),
                                aggregate_flow.size());
}

double objective(const NetworkInstance& inst, const FlowState& flow) {
  return objective(inst, flow.aggregate);
}

double stochastic_objective(const NetworkInstance& inst,
                            std::span<const FlowState> flows) {
  if (flows.size() != inst.scenarios.size())
    throw std::invalid_argument("stochastic_objective: expected " +
                                std::to_string(inst.scenarios.size()) +
                                " scenario flows, got " +
                                std::to_string(flows.size()));
  double value = 0.0;
  for (std::size_t s = 0; s < flows.size(); ++s)
    value += inst.scenarios[s].probability * objective(inst, flows[s]);
  return value;
}

void gradient(const NetworkInstance& inst,
              const std::vector<double>& aggregate_flow,
              std::vector<double>& out) {
  out.resize(aggregate_flow.size());
  kernels::edge_cost_grad(aggregate_flow.data(), inst.beta.data(),
                          inst.gamma.data(), inst.rho.data(), out.data(),
                          aggregate_flow.size());
}

double penalized_objective(const NetworkInstance& inst, const FlowState& flow,
                           const std::vector<double>& design, double mu,
                           double p, int scenario) {
  const int E = inst.edge_count();
  double value = objective(inst, flow);
  value += kernels::dot(inst.prices.data(), design.data(), design.size());
  const DemandTable& table = inst.scenarios[scenario];
  double penalty = 0.0;
  for (int zi = 0; zi < inst.zone_count(); ++zi) {
    const double* xz =
        flow.per_destination.data() + static_cast<std::size_t>(zi) * E;
    double big_m = table.zone_total[zi];
    for (std::size_t ri = 0; ri < inst.removable.size(); ++ri) {
      double excess = xz[inst.removable[ri]] - big_m * design[ri];
      if (excess > 0.0) penalty += std::pow(excess, p);
    }
  }
  return value + mu * penalty;
}

double constraint_violation(const NetworkInstance& inst,
                            std::span<const FlowState> flows,
                            const std::vector<double>& design) {
  const int E = inst.edge_count();
  double worst = 0.0;
  for (const FlowState& flow : flows) {
    for (int zi = 0; zi < inst.zone_count(); ++zi) {
      const double* xz =
          flow.per_destination.data() + static_cast<std::size_t>(zi) * E;
      for (std::size_t ri = 0; ri < inst.removable.size(); ++ri) {
        if (design[ri] > 0.5) continue;  // open arc, nothing to violate
        worst = std::max(worst, xz[inst.removable[ri]]);
      }
    }
  }
  return worst;
}

double max_conservation_violation(const NetworkInstance& inst,
                                  const FlowState& flow, int scenario) {
  const int E = inst.edge_count();
  double worst = 0.0;
  for (int zi = 0; zi < inst.zone_count(); ++zi) {
    const double* xz =
        flow.per_destination.data() + static_cast<std::size_t>(zi) * E;
    int zone_node = inst.zones[zi];
    for (int n = 0; n < inst.node_count; ++n) {
      double net = 0.0;
      for (int e : inst.edges_out(n)) net += xz[e];
      for (int e : inst.edges_in(n)) net -= xz[e];
      double expected = 0.0;
      if (n == zone_node) {
        expected = -inst.scenarios[scenario].zone_total[zi];
      } else if (int oi = inst.origin_index_of_node[n]; oi >= 0) {
        expected = inst.demand(scenario, oi, zi);
      }
      worst = std::max(worst, std::abs(net - expected));
    }
  }
  return worst;
}

}  // namespace netdesign
