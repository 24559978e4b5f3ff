#include "netdesign/traffic_assignment.hpp"

#include <algorithm>
#include <utility>

#include "netdesign/kernels.hpp"

namespace netdesign {

std::vector<double> TaObjective::aggregate(std::span<const double> x) const {
  const std::size_t E = static_cast<std::size_t>(inst_.edge_count());
  std::vector<double> agg(E, 0.0);
  for (int z = 0; z < inst_.zone_count(); ++z)
    kernels::add(x.data() + static_cast<std::size_t>(z) * E, agg.data(), E);
  return agg;
}

double TaObjective::value(std::span<const double> x) const {
  return objective(inst_, aggregate(x));
}

void TaObjective::gradient(std::span<const double> x,
                           std::span<double> out) const {
  const std::size_t E = static_cast<std::size_t>(inst_.edge_count());
  std::vector<double> agg = aggregate(x);
  std::vector<double> marginal(E);
  kernels::edge_cost_grad(agg.data(), inst_.beta.data(), inst_.gamma.data(),
                          inst_.rho.data(), marginal.data(), E);
  for (int z = 0; z < inst_.zone_count(); ++z)
    std::copy(marginal.begin(), marginal.end(),
              out.begin() + static_cast<std::size_t>(z) * E);
}

std::function<double(double)> TaObjective::derivative_along(
    std::span<const double> x, std::span<const double> d) const {
  // The objective depends on x only through the aggregate, so the line
  // derivative needs just two E-sized vectors regardless of zone count.
  const std::size_t E = static_cast<std::size_t>(inst_.edge_count());
  std::vector<double> agg_x = aggregate(x);
  std::vector<double> agg_d = aggregate(d);
  return [this, E, agg_x = std::move(agg_x),
          agg_d = std::move(agg_d)](double t) {
    std::vector<double> point(E), grad(E);
    for (std::size_t e = 0; e < E; ++e) point[e] = agg_x[e] + t * agg_d[e];
    kernels::edge_cost_grad(point.data(), inst_.beta.data(),
                            inst_.gamma.data(), inst_.rho.data(), grad.data(),
                            E);
    return kernels::dot(grad.data(), agg_d.data(), E);
  };
}

LmoResult TaFlowLmo::minimize(std::span<const double> gradient) {
  const std::size_t E = static_cast<std::size_t>(inst_.edge_count());
  std::span<const double> weights = gradient.first(E);  // zone-uniform
  FlowState flow = all_or_nothing(inst_, weights, closed_, scenario_);
  LmoResult res;
  res.value = kernels::dot(weights.data(), flow.aggregate.data(), E);
  res.vertex = std::move(flow.per_destination);
  return res;
}

TaSolveResult solve_traffic_assignment(const NetworkInstance& inst,
                                       int scenario,
                                       const std::vector<bool>* closed,
                                       const BpcgConfig& config) {
  TaObjective objective(inst, scenario);
  TaFlowLmo lmo(inst, scenario, closed);
  // Warm start: all-or-nothing at free-flow travel times (the gradient at
  // zero flow).
  FlowState start = all_or_nothing(inst, inst.beta, closed, scenario);

  SolveReport report =
      bpcg_solve(objective, lmo, std::move(start.per_destination), config);

  TaSolveResult result;
  result.flow.per_destination = report.iterate;
  result.flow.recompute_aggregate(inst.zone_count(), inst.edge_count());
  result.report = std::move(report);
  return result;
}

}  // namespace netdesign
