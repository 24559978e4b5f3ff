#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "netdesign/bpcg.hpp"
#include "netdesign/instance.hpp"

namespace netdesign {

// Memory layout of a design-problem point: all scenario flows first
// (scenario-major, inside each scenario the zone-major per-destination
// blocks of FlowState), then one slot per removable arc for the design
// variables. Vertices keep the design slots in {0,1}; convex combinations
// of vertices live in [0,1].
struct ProblemLayout {
  std::size_t edge_count = 0;
  std::size_t zone_count = 0;
  std::size_t scenario_count = 0;
  std::size_t removable_count = 0;

  static ProblemLayout of(const NetworkInstance& inst);

  std::size_t flow_offset(std::size_t scenario, std::size_t zone) const {
    return (scenario * zone_count + zone) * edge_count;
  }
  std::size_t scenario_size() const { return zone_count * edge_count; }
  std::size_t design_offset() const {
    return scenario_count * scenario_size();
  }
  std::size_t dimension() const { return design_offset() + removable_count; }

  std::span<const double> scenario_flows(std::span<const double> point,
                                         std::size_t scenario) const {
    return point.subspan(flow_offset(scenario, 0), scenario_size());
  }
  std::span<const double> design(std::span<const double> point) const {
    return point.subspan(design_offset(), removable_count);
  }
  std::span<double> design(std::span<double> point) const {
    return point.subspan(design_offset(), removable_count);
  }

  /// Sums the per-destination blocks of one scenario into an edge-indexed
  /// total. `out` must have edge_count entries; it is overwritten.
  void aggregate_scenario(std::span<const double> point, std::size_t scenario,
                          std::span<double> out) const;

  /// Copies one scenario's block into a FlowState (aggregate included).
  FlowState extract_flow(std::span<const double> point,
                         std::size_t scenario) const;

  /// Assembles a full point from per-scenario flows and a design vector.
  std::vector<double> pack(std::span<const FlowState> flows,
                           std::span<const double> design) const;
};

// Per-arc 0/1 bounds imposed on the design variables by the outer search.
struct DesignBounds {
  std::vector<std::uint8_t> lower, upper;

  static DesignBounds free_box(std::size_t removable_count) {
    DesignBounds b;
    b.lower.assign(removable_count, 0);
    b.upper.assign(removable_count, 1);
    return b;
  }

  std::size_t size() const { return lower.size(); }
  bool fixed(std::size_t i) const { return lower[i] == upper[i]; }

  /// Throws std::invalid_argument on size mismatch, values outside {0,1},
  /// or lower > upper.
  void validate(std::size_t removable_count) const;
};

// Expected congestion cost plus the linear purchase prices:
//   f(x, y) = sum_s p_s * c(aggregate flow of scenario s) + prices . y.
// Convex in the flows, linear in y; scenarios are independent, so the
// flow gradient of scenario s is p_s times the marginal cost at its
// aggregate, broadcast to every destination block.
class CoupledDesignObjective : public Objective {
 public:
  explicit CoupledDesignObjective(const NetworkInstance& inst)
      : inst_(&inst), layout_(ProblemLayout::of(inst)) {}

  const ProblemLayout& layout() const { return layout_; }

  double value(std::span<const double> point) const override;
  void gradient(std::span<const double> point,
                std::span<double> out) const override;
  std::function<double(double)> derivative_along(
      std::span<const double> point,
      std::span<const double> direction) const override;

 private:
  const NetworkInstance* inst_;
  ProblemLayout layout_;
};

/// Largest coupling violation max(x_e^z - M^z y_e, 0) of a point, over all
/// scenarios, destinations, and removable arcs; arcs with y > 0.5 count as
/// open. Wraps constraint_violation for the packed layout.
double point_violation(const NetworkInstance& inst, const ProblemLayout& layout,
                       std::span<const double> point);

/// Worst flow-conservation defect across all scenarios of a packed point.
double point_conservation_violation(const NetworkInstance& inst,
                                    const ProblemLayout& layout,
                                    std::span<const double> point);

}  // namespace netdesign
