#include "netdesign/instance_build.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "netdesign/errors.hpp"
#include "netdesign/rng.hpp"
#include "netdesign/traffic_assignment.hpp"

namespace netdesign {

namespace {

// Keeps the removable-arc draw independent of the scenario sampling, which
// consumes the unsalted seed stream.
constexpr std::uint64_t kArcDrawSalt = 0x8f1c5a11d0d5eedull;

void require_spec(bool condition, const std::string& message) {
  if (!condition)
    throw std::invalid_argument("build_instance: " + message);
}

// Dense origin-major demand matrix over the given node index maps;
// accumulates duplicates, drops self-demand.
DemandTable dense_table(const RawTripTable& trips,
                        const std::vector<int>& origin_index_of_node,
                        const std::vector<int>& zone_index_of_node,
                        std::size_t origin_count, std::size_t zone_count) {
  DemandTable table;
  table.demand.assign(origin_count * zone_count, 0.0);
  for (const TripEntry& e : trips.entries) {
    if (e.origin == e.destination || e.demand <= 0.0) continue;
    int o = origin_index_of_node[e.origin - 1];
    int z = zone_index_of_node[e.destination - 1];
    table.demand[static_cast<std::size_t>(o) * zone_count +
                 static_cast<std::size_t>(z)] += e.demand;
  }
  table.zone_total.assign(zone_count, 0.0);
  for (std::size_t o = 0; o < origin_count; ++o)
    for (std::size_t z = 0; z < zone_count; ++z)
      table.zone_total[z] += table.demand[o * zone_count + z];
  return table;
}

}  // namespace

NetworkInstance build_instance(const RawTntpNetwork& net,
                               const RawTripTable& trips,
                               const InstanceSpec& spec) {
  require_spec(spec.removal_fraction > 0.0 && spec.removal_fraction < 1.0,
               "removal_fraction must lie in (0, 1)");
  require_spec(spec.scenario_count >= 0, "scenario_count must be >= 0");
  require_spec(spec.scenario_low <= spec.scenario_high,
               "scenario_low exceeds scenario_high");
  require_spec(spec.toll_factor >= 0.0 && std::isfinite(spec.toll_factor),
               "toll_factor must be a nonnegative real");
  require_spec(
      spec.distance_factor >= 0.0 && std::isfinite(spec.distance_factor),
      "distance_factor must be a nonnegative real");

  const std::size_t edge_count = net.links.size();
  const int removable_count = static_cast<int>(
      std::floor(spec.removal_fraction * static_cast<double>(edge_count)));
  require_spec(removable_count >= 1,
               "removal_fraction * edge count rounds to zero arcs; raise the "
               "fraction or use a larger network");

  NetworkInstance inst;
  inst.node_count = net.node_count;
  for (const RawTntpLink& link : net.links) {
    if (link.init_node < 1 || link.init_node > net.node_count ||
        link.term_node < 1 || link.term_node > net.node_count)
      throw ParseError("link endpoint outside the declared node range");
    inst.edges.push_back({link.init_node - 1, link.term_node - 1});
    BprRecord r;
    r.free_flow_time = link.free_flow_time;
    r.b = link.b;
    r.capacity = link.capacity;
    r.power = link.power;
    r.constant =
        spec.toll_factor * link.toll + spec.distance_factor * link.length;
    EdgeCostCoeffs c = derive_cost_coeffs(r);
    inst.alpha.push_back(c.alpha);
    inst.beta.push_back(c.beta);
    inst.gamma.push_back(c.gamma);
    inst.rho.push_back(c.rho);
  }

  // Node sets implied by the positive demand entries (1-based zone ids in
  // TNTP files are node ids).
  std::vector<bool> is_origin(static_cast<std::size_t>(net.node_count), false);
  std::vector<bool> is_zone(static_cast<std::size_t>(net.node_count), false);
  for (const TripEntry& e : trips.entries) {
    if (e.origin == e.destination || e.demand <= 0.0) continue;
    if (e.origin < 1 || e.origin > net.node_count || e.destination < 1 ||
        e.destination > net.node_count)
      throw ParseError("trip entry references a node outside the network");
    is_origin[e.origin - 1] = true;
    is_zone[e.destination - 1] = true;
  }
  for (int v = 0; v < net.node_count; ++v) {
    if (is_origin[v]) inst.origins.push_back(v);
    if (is_zone[v]) inst.zones.push_back(v);
  }
  require_spec(!inst.origins.empty(),
               "the trip table has no positive demand entries");

  std::vector<int> origin_index(static_cast<std::size_t>(net.node_count), -1);
  std::vector<int> zone_index(static_cast<std::size_t>(net.node_count), -1);
  for (std::size_t i = 0; i < inst.origins.size(); ++i)
    origin_index[inst.origins[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < inst.zones.size(); ++i)
    zone_index[inst.zones[i]] = static_cast<int>(i);

  DemandTable base = dense_table(trips, origin_index, zone_index,
                                 inst.origins.size(), inst.zones.size());
  base.probability = 1.0;

  if (spec.scenario_count == 0) {
    inst.scenarios = {base};
  } else {
    std::vector<RawTripTable> drawn = sample_scenarios(trips, spec);
    for (const RawTripTable& t : drawn) {
      DemandTable table = dense_table(t, origin_index, zone_index,
                                      inst.origins.size(), inst.zones.size());
      table.probability = 1.0 / static_cast<double>(spec.scenario_count);
      inst.scenarios.push_back(std::move(table));
    }
  }

  // Price the removable arcs off the intact network: one assignment solve on
  // the nominal demand, total cost spread over all edges. This also proves
  // every demanded pair routable when the whole removable set is open; a
  // disconnection here cannot be fixed by redrawing the set, so the routing
  // error propagates.
  double arc_price;
  {
    NetworkInstance pricing = inst;
    pricing.scenarios = {base};
    pricing.finalize();
    double equilibrium = solve_traffic_assignment(pricing).report.objective;
    arc_price = equilibrium / static_cast<double>(edge_count);
  }

  SplitMix64 rng(spec.seed ^ kArcDrawSalt);
  std::vector<int> pool(edge_count);
  for (std::size_t e = 0; e < edge_count; ++e) pool[e] = static_cast<int>(e);
  for (int k = 0; k < removable_count; ++k) {
    std::size_t pick = rng.below(pool.size());
    inst.removable.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<long>(pick));
  }
  std::sort(inst.removable.begin(), inst.removable.end());
  inst.prices.assign(static_cast<std::size_t>(removable_count), arc_price);

  inst.finalize();
  return inst;
}

}  // namespace netdesign
