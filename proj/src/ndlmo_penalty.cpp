#include "netdesign/ndlmo_penalty.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "netdesign/kernels.hpp"
#include "netdesign/shortest_path.hpp"

namespace netdesign {
namespace {

void check_config(const PenaltyConfig& cfg) {
  if (!(cfg.mu > 0.0) || !(cfg.p > 1.0)) {
    throw std::invalid_argument("penalty needs mu > 0 and p > 1");
  }
}

}  // namespace

PenaltyGradients penalty_gradients(const NetworkInstance& inst,
                                   const FlowState& flow,
                                   const std::vector<double>& design,
                                   const PenaltyConfig& cfg, int scenario) {
  check_config(cfg);
  const std::size_t edges = inst.edges.size();
  const std::size_t zones = inst.zones.size();
  const std::size_t arcs = inst.removable.size();
  if (design.size() != arcs) {
    throw std::invalid_argument("design size does not match the arc set");
  }
  const double factor = (cfg.factor_two ? 2.0 : 1.0) * cfg.mu * cfg.p;
  PenaltyGradients out;
  out.design.assign(arcs, 0.0);
  out.flow.assign(zones * edges, 0.0);
  const auto& big_m = inst.scenarios[static_cast<std::size_t>(scenario)]
                          .zone_total;
  for (std::size_t r = 0; r < arcs; ++r) {
    const std::size_t e = static_cast<std::size_t>(inst.removable[r]);
    for (std::size_t z = 0; z < zones; ++z) {
      const double slack =
          flow.per_destination[z * edges + e] - big_m[z] * design[r];
      if (slack <= 0.0) continue;
      const double h = factor * std::pow(slack, cfg.p - 1.0);
      out.flow[z * edges + e] = h;
      out.design[r] -= big_m[z] * h;
    }
  }
  return out;
}

std::vector<double> solve_design_lmo(std::span<const double> prices,
                                     std::span<const double> g,
                                     const DesignBounds& bounds) {
  if (prices.size() != g.size()) {
    throw std::invalid_argument("prices and g must align");
  }
  bounds.validate(prices.size());
  std::vector<double> design(prices.size());
  for (std::size_t i = 0; i < prices.size(); ++i) {
    const bool open = prices[i] + g[i] < 0.0;
    design[i] = static_cast<double>(open ? bounds.upper[i] : bounds.lower[i]);
  }
  return design;
}

FlowState solve_flow_lmo(const NetworkInstance& inst,
                         std::span<const double> marginal,
                         std::span<const double> h, int scenario) {
  const std::size_t edges = inst.edges.size();
  const std::size_t zones = inst.zones.size();
  if (marginal.size() != edges || h.size() != zones * edges) {
    throw std::invalid_argument("weight sizes do not match the instance");
  }
  std::vector<std::vector<double>> weights(zones,
                                           std::vector<double>(edges));
  for (std::size_t z = 0; z < zones; ++z) {
    for (std::size_t e = 0; e < edges; ++e) {
      weights[z][e] = marginal[e] + h[z * edges + e];
    }
  }
  return all_or_nothing_per_zone(inst, weights, nullptr, scenario);
}

double PenalizedDesignObjective::value(std::span<const double> point) const {
  check_config(cfg_);
  const auto& inst = *inst_;
  const std::size_t edges = layout_.edge_count;
  std::vector<double> agg(edges);
  double total = 0.0;
  for (std::size_t s = 0; s < layout_.scenario_count; ++s) {
    layout_.aggregate_scenario(point, s, agg);
    total += inst.scenarios[s].probability * objective(inst, agg);
  }
  auto y = layout_.design(point);
  total += kernels::dot(y.data(), inst.prices.data(), layout_.removable_count);
  double penalty = 0.0;
  for (std::size_t s = 0; s < layout_.scenario_count; ++s) {
    const auto& big_m = inst.scenarios[s].zone_total;
    for (std::size_t z = 0; z < layout_.zone_count; ++z) {
      const double* block = point.data() + layout_.flow_offset(s, z);
      for (std::size_t r = 0; r < layout_.removable_count; ++r) {
        const std::size_t e = static_cast<std::size_t>(inst.removable[r]);
        const double slack = block[e] - big_m[z] * y[r];
        if (slack > 0.0) penalty += std::pow(slack, cfg_.p);
      }
    }
  }
  return total + cfg_.mu * penalty;
}

void PenalizedDesignObjective::gradient(std::span<const double> point,
                                        std::span<double> out) const {
  check_config(cfg_);
  const auto& inst = *inst_;
  const std::size_t edges = layout_.edge_count;
  std::vector<double> agg(edges), marginal(edges);
  auto y = layout_.design(point);
  auto out_y = layout_.design(out);
  std::copy(inst.prices.begin(), inst.prices.end(), out_y.begin());
  const double mu_p = cfg_.mu * cfg_.p;
  for (std::size_t s = 0; s < layout_.scenario_count; ++s) {
    layout_.aggregate_scenario(point, s, agg);
    kernels::edge_cost_grad(agg.data(), inst.beta.data(), inst.gamma.data(),
                            inst.rho.data(), marginal.data(), edges);
    kernels::scal(inst.scenarios[s].probability, marginal.data(), edges);
    const auto& big_m = inst.scenarios[s].zone_total;
    for (std::size_t z = 0; z < layout_.zone_count; ++z) {
      const double* block = point.data() + layout_.flow_offset(s, z);
      double* out_block = out.data() + layout_.flow_offset(s, z);
      std::copy(marginal.begin(), marginal.end(), out_block);
      for (std::size_t r = 0; r < layout_.removable_count; ++r) {
        const std::size_t e = static_cast<std::size_t>(inst.removable[r]);
        const double slack = block[e] - big_m[z] * y[r];
        if (slack <= 0.0) continue;
        const double h = mu_p * std::pow(slack, cfg_.p - 1.0);
        out_block[e] += h;
        out_y[r] -= big_m[z] * h;
      }
    }
  }
}

std::function<double(double)> PenalizedDesignObjective::derivative_along(
    std::span<const double> point, std::span<const double> direction) const {
  check_config(cfg_);
  const auto& inst = *inst_;
  const std::size_t edges = layout_.edge_count;
  const std::size_t scenarios = layout_.scenario_count;
  std::vector<double> agg_x(scenarios * edges), agg_d(scenarios * edges);
  for (std::size_t s = 0; s < scenarios; ++s) {
    layout_.aggregate_scenario(point, s, {agg_x.data() + s * edges, edges});
    layout_.aggregate_scenario(direction, s,
                               {agg_d.data() + s * edges, edges});
  }
  auto y = layout_.design(point);
  auto dy = layout_.design(direction);
  const double price_term =
      kernels::dot(dy.data(), inst.prices.data(), layout_.removable_count);
  // Coupling slacks and their rates of change, flattened over (s, z, r).
  std::vector<double> slack_now, slack_rate;
  slack_now.reserve(scenarios * layout_.zone_count * layout_.removable_count);
  slack_rate.reserve(slack_now.capacity());
  for (std::size_t s = 0; s < scenarios; ++s) {
    const auto& big_m = inst.scenarios[s].zone_total;
    for (std::size_t z = 0; z < layout_.zone_count; ++z) {
      const double* xb = point.data() + layout_.flow_offset(s, z);
      const double* db = direction.data() + layout_.flow_offset(s, z);
      for (std::size_t r = 0; r < layout_.removable_count; ++r) {
        const std::size_t e = static_cast<std::size_t>(inst.removable[r]);
        slack_now.push_back(xb[e] - big_m[z] * y[r]);
        slack_rate.push_back(db[e] - big_m[z] * dy[r]);
      }
    }
  }
  return [this, agg_x = std::move(agg_x), agg_d = std::move(agg_d), price_term,
          slack_now = std::move(slack_now),
          slack_rate = std::move(slack_rate),
          probe = std::vector<double>(edges),
          marginal = std::vector<double>(edges)](double t) mutable {
    const auto& inst = *inst_;
    const std::size_t edges = layout_.edge_count;
    double result = price_term;
    for (std::size_t s = 0; s < layout_.scenario_count; ++s) {
      const double* x = agg_x.data() + s * edges;
      const double* d = agg_d.data() + s * edges;
      std::copy(x, x + edges, probe.begin());
      kernels::axpy(t, d, probe.data(), edges);
      kernels::edge_cost_grad(probe.data(), inst.beta.data(),
                              inst.gamma.data(), inst.rho.data(),
                              marginal.data(), edges);
      result += inst.scenarios[s].probability *
                kernels::dot(marginal.data(), d, edges);
    }
    const double mu_p = cfg_.mu * cfg_.p;
    for (std::size_t k = 0; k < slack_now.size(); ++k) {
      const double slack = slack_now[k] + t * slack_rate[k];
      if (slack > 0.0) {
        result += mu_p * std::pow(slack, cfg_.p - 1.0) * slack_rate[k];
      }
    }
    return result;
  };
}

void PenaltyLmo::set_bounds(DesignBounds bounds) {
  bounds.validate(layout_.removable_count);
  bounds_ = std::move(bounds);
}

LmoResult PenaltyLmo::minimize(std::span<const double> gradient) {
  ++calls_;
  if (gradient.size() != layout_.dimension()) {
    throw std::invalid_argument("gradient size does not match the layout");
  }
  const auto& inst = *inst_;
  const std::size_t edges = layout_.edge_count;
  LmoResult result;
  result.vertex.assign(layout_.dimension(), 0.0);

  auto gy = gradient.subspan(layout_.design_offset(), layout_.removable_count);
  std::vector<double> design =
      solve_design_lmo(gy, std::vector<double>(layout_.removable_count, 0.0),
                       bounds_);
  std::copy(design.begin(), design.end(),
            result.vertex.begin() +
                static_cast<std::ptrdiff_t>(layout_.design_offset()));

  std::vector<std::vector<double>> weights(layout_.zone_count,
                                           std::vector<double>(edges));
  for (std::size_t s = 0; s < layout_.scenario_count; ++s) {
    for (std::size_t z = 0; z < layout_.zone_count; ++z) {
      auto block = gradient.subspan(layout_.flow_offset(s, z), edges);
      std::copy(block.begin(), block.end(), weights[z].begin());
    }
    FlowState flow =
        all_or_nothing_per_zone(inst, weights, nullptr, static_cast<int>(s));
    std::copy(flow.per_destination.begin(), flow.per_destination.end(),
              result.vertex.begin() +
                  static_cast<std::ptrdiff_t>(layout_.flow_offset(s, 0)));
  }
  result.value = kernels::dot(gradient.data(), result.vertex.data(),
                              layout_.dimension());
  result.exact = true;
  return result;
}

}  // namespace netdesign
