#pragma once

#include <span>
#include <vector>

#include "netdesign/bpcg.hpp"
#include "netdesign/instance.hpp"
#include "netdesign/shortest_path.hpp"

namespace netdesign {

// Pure traffic assignment for one demand scenario. Points are the
// per-destination flows, zone-major: x[z*E + e]. The congestion objective
// only depends on the aggregate flow, so gradient blocks repeat across
// zones.

class TaObjective : public Objective {
 public:
  TaObjective(const NetworkInstance& inst, int scenario = 0)
      : inst_(inst), scenario_(scenario) {}

  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x,
                std::span<double> out) const override;
  std::function<double(double)> derivative_along(
      std::span<const double> x, std::span<const double> d) const override;

  /// Aggregate edge flow of a point (sum of zone blocks).
  std::vector<double> aggregate(std::span<const double> x) const;

 private:
  const NetworkInstance& inst_;
  int scenario_;
};

// All-or-nothing oracle over the flow polytope. Requires the gradient to be
// zone-uniform (true for TaObjective); reads edge weights off the first
// zone block.
class TaFlowLmo : public Lmo {
 public:
  TaFlowLmo(const NetworkInstance& inst, int scenario = 0,
            const std::vector<bool>* closed = nullptr)
      : inst_(inst), scenario_(scenario), closed_(closed) {}

  LmoResult minimize(std::span<const double> gradient) override;

 private:
  const NetworkInstance& inst_;
  int scenario_;
  const std::vector<bool>* closed_;
};

struct TaSolveResult {
  SolveReport report;
  FlowState flow;  // iterate repackaged with aggregates
};

/// Equilibrium traffic assignment: BPCG over the flow polytope, warm-started
/// from the free-flow all-or-nothing assignment.
TaSolveResult solve_traffic_assignment(const NetworkInstance& inst,
                                       int scenario = 0,
                                       const std::vector<bool>* closed = nullptr,
                                       const BpcgConfig& config = {});

}  // namespace netdesign
