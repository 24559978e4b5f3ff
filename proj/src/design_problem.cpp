#include "netdesign/design_problem.hpp"

#include <algorithm>
#include <stdexcept>

#include "netdesign/kernels.hpp"

namespace netdesign {

ProblemLayout ProblemLayout::of(const NetworkInstance& inst) {
  ProblemLayout layout;
  layout.edge_count = static_cast<std::size_t>(inst.edge_count());
  layout.zone_count = static_cast<std::size_t>(inst.zone_count());
  layout.scenario_count = static_cast<std::size_t>(inst.scenario_count());
  layout.removable_count = static_cast<std::size_t>(inst.removable_count());
  return layout;
}

void ProblemLayout::aggregate_scenario(std::span<const double> point,
                                       std::size_t scenario,
                                       std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t z = 0; z < zone_count; ++z) {
    kernels::add(point.data() + flow_offset(scenario, z), out.data(),
                 edge_count);
  }
}

FlowState ProblemLayout::extract_flow(std::span<const double> point,
                                      std::size_t scenario) const {
  FlowState flow;
  auto block = scenario_flows(point, scenario);
  flow.per_destination.assign(block.begin(), block.end());
  flow.recompute_aggregate(static_cast<int>(zone_count),
                           static_cast<int>(edge_count));
  return flow;
}

std::vector<double> ProblemLayout::pack(std::span<const FlowState> flows,
                                        std::span<const double> design) const {
  if (flows.size() != scenario_count || design.size() != removable_count) {
    throw std::invalid_argument("pack: component sizes do not match layout");
  }
  std::vector<double> point(dimension());
  for (std::size_t s = 0; s < scenario_count; ++s) {
    std::copy(flows[s].per_destination.begin(),
              flows[s].per_destination.end(),
              point.begin() + static_cast<std::ptrdiff_t>(flow_offset(s, 0)));
  }
  std::copy(design.begin(), design.end(),
            point.begin() + static_cast<std::ptrdiff_t>(design_offset()));
  return point;
}

void DesignBounds::validate(std::size_t removable_count) const {
  if (lower.size() != removable_count || upper.size() != removable_count) {
    throw std::invalid_argument("design bounds size does not match the arc set");
  }
  for (std::size_t i = 0; i < removable_count; ++i) {
    if (lower[i] > 1 || upper[i] > 1 || lower[i] > upper[i]) {
      throw std::invalid_argument("design bounds must satisfy 0 <= lower <= upper <= 1");
    }
  }
}

double CoupledDesignObjective::value(std::span<const double> point) const {
  const auto& inst = *inst_;
  std::vector<double> agg(layout_.edge_count);
  double total = 0.0;
  for (std::size_t s = 0; s < layout_.scenario_count; ++s) {
    layout_.aggregate_scenario(point, s, agg);
    total += inst.scenarios[s].probability * objective(inst, agg);
  }
  auto y = layout_.design(point);
  total += kernels::dot(y.data(), inst.prices.data(), layout_.removable_count);
  return total;
}

void CoupledDesignObjective::gradient(std::span<const double> point,
                                      std::span<double> out) const {
  const auto& inst = *inst_;
  std::vector<double> agg(layout_.edge_count);
  std::vector<double> marginal(layout_.edge_count);
  for (std::size_t s = 0; s < layout_.scenario_count; ++s) {
    layout_.aggregate_scenario(point, s, agg);
    kernels::edge_cost_grad(agg.data(), inst.beta.data(), inst.gamma.data(),
                            inst.rho.data(), marginal.data(),
                            layout_.edge_count);
    kernels::scal(inst.scenarios[s].probability, marginal.data(),
                  layout_.edge_count);
    for (std::size_t z = 0; z < layout_.zone_count; ++z) {
      std::copy(marginal.begin(), marginal.end(),
                out.begin() +
                    static_cast<std::ptrdiff_t>(layout_.flow_offset(s, z)));
    }
  }
  std::copy(inst.prices.begin(), inst.prices.end(),
            out.begin() + static_cast<std::ptrdiff_t>(layout_.design_offset()));
}

std::function<double(double)> CoupledDesignObjective::derivative_along(
    std::span<const double> point, std::span<const double> direction) const {
  const auto& inst = *inst_;
  const std::size_t n = layout_.edge_count;
  const std::size_t scenarios = layout_.scenario_count;
  std::vector<double> agg_x(scenarios * n), agg_d(scenarios * n);
  for (std::size_t s = 0; s < scenarios; ++s) {
    layout_.aggregate_scenario(point, s, {agg_x.data() + s * n, n});
    layout_.aggregate_scenario(direction, s, {agg_d.data() + s * n, n});
  }
  auto dy = layout_.design(direction);
  const double price_term =
      kernels::dot(dy.data(), inst.prices.data(), layout_.removable_count);
  return [this, agg_x = std::move(agg_x), agg_d = std::move(agg_d), price_term,
          probe = std::vector<double>(n),
          marginal = std::vector<double>(n)](double t) mutable {
    const auto& inst = *inst_;
    const std::size_t n = layout_.edge_count;
    double result = price_term;
    for (std::size_t s = 0; s < layout_.scenario_count; ++s) {
      const double* x = agg_x.data() + s * n;
      const double* d = agg_d.data() + s * n;
      std::copy(x, x + n, probe.begin());
      kernels::axpy(t, d, probe.data(), n);
      kernels::edge_cost_grad(probe.data(), inst.beta.data(),
                              inst.gamma.data(), inst.rho.data(),
                              marginal.data(), n);
      result +=
          inst.scenarios[s].probability * kernels::dot(marginal.data(), d, n);
    }
    return result;
  };
}

double point_violation(const NetworkInstance& inst, const ProblemLayout& layout,
                       std::span<const double> point) {
  std::vector<FlowState> flows;
  flows.reserve(layout.scenario_count);
  for (std::size_t s = 0; s < layout.scenario_count; ++s) {
    flows.push_back(layout.extract_flow(point, s));
  }
  auto y = layout.design(point);
  return constraint_violation(inst, flows,
                              std::vector<double>(y.begin(), y.end()));
}

double point_conservation_violation(const NetworkInstance& inst,
                                    const ProblemLayout& layout,
                                    std::span<const double> point) {
  double worst = 0.0;
  for (std::size_t s = 0; s < layout.scenario_count; ++s) {
    FlowState flow = layout.extract_flow(point, s);
    worst = std::max(worst, max_conservation_violation(inst, flow,
                                                       static_cast<int>(s)));
  }
  return worst;
}

}  // namespace netdesign
