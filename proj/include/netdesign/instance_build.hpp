#pragma once

#include "netdesign/instance.hpp"
#include "netdesign/tntp.hpp"

namespace netdesign {

/// Turns a parsed network and trip table into a design instance:
///   - edges keep file order; BPR records integrate to polynomial costs,
///     with toll_factor * toll + distance_factor * length as the constant
///     term of the travel time;
///   - origins/zones are the nodes with positive outbound/inbound demand
///     (self-demand entries are dropped);
///   - scenario_count = 0 keeps the nominal table as the single scenario,
///     otherwise the scenarios are independent per-entry demand scalings
///     drawn from [scenario_low, scenario_high) with uniform probabilities;
///   - ⌊removal_fraction * |E|⌋ removable arcs are drawn uniformly without
///     replacement from a stream salted apart from the scenario stream, and
///     every one is priced at (intact-network assignment objective) / |E|,
///     where the pricing solve runs on the nominal demand.
/// Throws std::invalid_argument when the spec rounds to zero removable arcs
/// or is otherwise out of range, ParseError when the inputs reference
/// impossible nodes, and RoutingInfeasible (with the offending pair) when
/// some demand cannot be routed even on the intact network.
NetworkInstance build_instance(const RawTntpNetwork& net,
                               const RawTripTable& trips,
                               const InstanceSpec& spec);

}  // namespace netdesign
