#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace netdesign {

struct Edge {
  int tail = 0;  // 0-based node index
  int head = 0;

  bool operator==(const Edge&) const = default;
};

// BPR ingredients of one edge; `constant` is the flow-independent cost term
// (toll/distance charges folded in by the instance builder).
struct BprRecord {
  double free_flow_time = 0.0;
  double b = 0.0;
  double capacity = 1.0;
  double power = 0.0;
  double constant = 0.0;
};

// Polynomial edge cost c_e(x) = alpha + beta*x + gamma*x^rho with rho > 1,
// the integrated form of the BPR travel time.
struct EdgeCostCoeffs {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double rho = 2.0;

  bool operator==(const EdgeCostCoeffs&) const = default;
};

/// Integrates the BPR travel time t(x) = fft*(1 + b*(x/C)^P) over [0, x].
/// For P = 0 the integrand is constant, so fft*b folds into the linear term
/// and gamma is zero (rho is then inert and kept at 2).
EdgeCostCoeffs derive_cost_coeffs(const BprRecord& r);

// One demand realization: dense origin x zone matrix plus the per-zone
// totals that serve as big-M coupling constants.
struct DemandTable {
  double probability = 1.0;
  std::vector<double> demand;      // origins.size() * zones.size(), origin-major
  std::vector<double> zone_total;  // per zone: sum of demand into it

  bool operator==(const DemandTable&) const = default;
};

// Immutable problem description: graph, cost model, demand scenarios, and
// the removable arc set with prices. Fill in the public fields, then call
// finalize() once; afterwards the instance is safe to share across threads.
struct NetworkInstance {
  int node_count = 0;
  std::vector<Edge> edges;

  // Cost coefficients, struct-of-arrays over edges.
  std::vector<double> alpha, beta, gamma, rho;

  std::vector<int> zones;    // 0-based nodes with inbound demand, sorted
  std::vector<int> origins;  // 0-based nodes with outbound demand, sorted

  std::vector<DemandTable> scenarios;  // at least one; probabilities sum to 1

  std::vector<int> removable;   // edge indices, sorted ascending
  std::vector<double> prices;   // aligned with removable, >= 0

  // Derived by finalize().
  double alpha_sum = 0.0;
  std::vector<int> zone_index_of_node;    // node -> position in zones, or -1
  std::vector<int> origin_index_of_node;  // node -> position in origins, or -1
  std::vector<int> removable_index_of_edge;  // edge -> position in R, or -1
  std::vector<int> out_offset, out_edges;    // CSR: outgoing edges per node
  std::vector<int> in_offset, in_edges;      // CSR: incoming edges per node

  /// Validates all invariants (throws std::invalid_argument) and builds the
  /// derived lookups. Must be called exactly once after filling the fields.
  void finalize();

  int edge_count() const { return static_cast<int>(edges.size()); }
  int zone_count() const { return static_cast<int>(zones.size()); }
  int origin_count() const { return static_cast<int>(origins.size()); }
  int scenario_count() const { return static_cast<int>(scenarios.size()); }
  int removable_count() const { return static_cast<int>(removable.size()); }

  double demand(int scenario, int origin_index, int zone_index) const {
    return scenarios[scenario]
        .demand[static_cast<std::size_t>(origin_index) * zones.size() +
                static_cast<std::size_t>(zone_index)];
  }

  std::span<const int> edges_out(int node) const {
    return {out_edges.data() + out_offset[node],
            out_edges.data() + out_offset[node + 1]};
  }
  std::span<const int> edges_in(int node) const {
    return {in_edges.data() + in_offset[node],
            in_edges.data() + in_offset[node + 1]};
  }
};

// Flows of one scenario, split by destination zone. `per_destination` is
// zone-major: entry [z*E + e] carries the flow on edge e bound for zones[z].
struct FlowState {
  std::vector<double> per_destination;  // zone_count * edge_count
  std::vector<double> aggregate;        // edge_count

  void recompute_aggregate(int zone_count, int edge_count);
};

/// Total congestion cost of an aggregate edge flow:
/// sum_e alpha_e + beta_e*x_e + gamma_e*x_e^rho_e.
double objective(const NetworkInstance& inst,
                 const std::vector<double>& aggregate_flow);
double objective(const NetworkInstance& inst, const FlowState& flow);

/// Probability-weighted congestion cost over scenario flows (the design
/// price term is the caller's): sum_s p_s * objective(inst, flows[s]).
/// Expects one flow per demand scenario.
double stochastic_objective(const NetworkInstance& inst,
                            std::span<const FlowState> flows);

/// Marginal edge costs: out[e] = beta_e + gamma_e*rho_e*x_e^(rho_e-1); the
/// BPR travel time at that flow when the constant term is excluded.
void gradient(const NetworkInstance& inst,
              const std::vector<double>& aggregate_flow,
              std::vector<double>& out);

/// Congestion cost + design prices + coupling penalty
/// mu * sum_z sum_{e in R} max(x_e^z - M^z y_e, 0)^p
/// for one scenario's flow. `design` has one entry per removable arc.
double penalized_objective(const NetworkInstance& inst, const FlowState& flow,
                           const std::vector<double>& design, double mu,
                           double p, int scenario = 0);

/// Largest flow routed across a closed removable arc, over all destinations
/// and all provided scenario flows. Zero means the design is respected.
double constraint_violation(const NetworkInstance& inst,
                            std::span<const FlowState> flows,
                            const std::vector<double>& design);

/// Worst absolute flow-conservation defect of a per-destination flow,
/// given the scenario's demands. Diagnostic used by tests.
double max_conservation_violation(const NetworkInstance& inst,
                                  const FlowState& flow, int scenario = 0);

}  // namespace netdesign
