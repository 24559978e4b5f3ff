#include "netdesign/ndlmo_benders.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>

#include "json.hpp"
#include "netdesign/bpcg.hpp"
#include "netdesign/kernels.hpp"
#include "netdesign/shortest_path.hpp"

namespace netdesign {
namespace {

using Clock = std::chrono::steady_clock;

Clock::time_point deadline_for(double budget_s) {
  if (!(budget_s < 1e9)) return Clock::time_point::max();
  return Clock::now() + std::chrono::duration_cast<Clock::duration>(
                            std::chrono::duration<double>(budget_s));
}

const char* kind_name(CutKind kind) {
  switch (kind) {
    case CutKind::optimality: return "optimality";
    case CutKind::feasibility: return "feasibility";
    case CutKind::bridge: return "bridge";
  }
  return "?";
}

std::vector<bool> closed_mask(const NetworkInstance& inst,
                              std::span<const double> design) {
  std::vector<bool> closed(inst.edge_count(), false);
  for (std::size_t r = 0; r < inst.removable.size(); ++r)
    if (design[r] < 0.5) closed[inst.removable[r]] = true;
  return closed;
}

}  // namespace

double Cut::lhs(std::span<const double> design) const {
  double total = 0.0;
  for (const auto& [arc, weight] : coeffs) total += weight * design[arc];
  return total;
}

bool CutPool::add(Cut cut) {
  std::sort(cut.coeffs.begin(), cut.coeffs.end());
  std::vector<double> flat;
  flat.reserve(2 * cut.coeffs.size() + 3);
  flat.push_back(static_cast<double>(cut.kind));
  flat.push_back(static_cast<double>(cut.scenario));
  flat.push_back(cut.rhs);
  for (const auto& [arc, weight] : cut.coeffs) {
    flat.push_back(static_cast<double>(arc));
    flat.push_back(weight);
  }
  const std::uint64_t fp = fingerprint(flat);
  auto& bucket = by_fingerprint_[fp];
  for (std::size_t idx : bucket) {
    const Cut& other = cuts_[idx];
    if (other.kind == cut.kind && other.scenario == cut.scenario &&
        other.rhs == cut.rhs && other.coeffs == cut.coeffs)
      return false;
  }
  bucket.push_back(cuts_.size());
  cuts_.push_back(std::move(cut));
  return true;
}

std::string CutPool::to_json() const {
  nlohmann::ordered_json dump = nlohmann::ordered_json::array();
  for (const Cut& cut : cuts_) {
    nlohmann::ordered_json coeffs = nlohmann::ordered_json::array();
    for (const auto& [arc, weight] : cut.coeffs)
      coeffs.push_back({arc, weight});
    dump.push_back({{"kind", kind_name(cut.kind)},
                    {"coeffs", std::move(coeffs)},
                    {"rhs", cut.rhs},
                    {"includes_eta", cut.includes_eta},
                    {"scenario", cut.scenario},
                    {"iteration", cut.iteration}});
  }
  return dump.dump(2);
}

DualOutcome dual_subproblem(const NetworkInstance& inst,
                            std::span<const double> weights,
                            std::span<const double> design, int scenario,
                            DualRule rule) {
  const std::size_t node_count = static_cast<std::size_t>(inst.node_count);
  const std::size_t zone_count = inst.zone_count();
  const std::size_t origin_count = inst.origin_count();
  const std::size_t removable = inst.removable_count();
  if (weights.size() != static_cast<std::size_t>(inst.edge_count()))
    throw std::invalid_argument("dual_subproblem: weight size mismatch");
  if (design.size() != removable)
    throw std::invalid_argument("dual_subproblem: design size mismatch");

  const std::vector<bool> closed = closed_mask(inst, design);
  DualValues duals;
  duals.origin_potentials.assign(zone_count * origin_count, 0.0);
  duals.cut_coeffs.assign(zone_count * removable, 0.0);

  std::vector<double> phi;
  std::vector<double> penalized;
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t zi = 0; zi < zone_count; ++zi) {
    const int target = inst.zones[zi];
    const ShortestPathTree tree = dijkstra_to(inst, weights, target, &closed);
    for (std::size_t oi = 0; oi < origin_count; ++oi) {
      const double demand =
          inst.demand(scenario, static_cast<int>(oi), static_cast<int>(zi));
      const int origin = inst.origins[oi];
      if (demand > 0.0 && !tree.reached(origin))
        return InfeasibilityCertificate{origin, static_cast<int>(zi),
                                        reachable_from(inst, origin, &closed)};
      duals.origin_potentials[zi * origin_count + oi] = tree.dist[origin];
      if (demand > 0.0) duals.value += demand * tree.dist[origin];
    }

    if (rule == DualRule::unit) {
      for (std::size_t r = 0; r < removable; ++r)
        duals.cut_coeffs[zi * removable + r] = design[r] < 0.5 ? 1.0 : 0.0;
      continue;
    }

    // Potentials for the LP slacks must be finite and satisfy
    // phi[tail] - phi[head] <= w on every open arc. Where the design
    // disconnects nodes from the target, rerun with closed arcs priced at
    // a penalty larger than any finite distance: reached nodes keep their
    // exact distances and the rest get finite, still-feasible values.
    phi.assign(tree.dist.begin(), tree.dist.end());
    bool all_reached = true;
    double max_dist = 0.0;
    for (std::size_t i = 0; i < node_count; ++i) {
      if (phi[i] == inf)
        all_reached = false;
      else
        max_dist = std::max(max_dist, phi[i]);
    }
    if (!all_reached) {
      penalized.assign(weights.begin(), weights.end());
      const double penalty = max_dist + 1.0;
      for (std::size_t r = 0; r < removable; ++r)
        if (design[r] < 0.5) penalized[inst.removable[r]] += penalty;
      const ShortestPathTree relaxed = dijkstra_to(inst, penalized, target);
      double max_relaxed = penalty;
      for (std::size_t i = 0; i < node_count; ++i)
        if (relaxed.dist[i] != inf)
          max_relaxed = std::max(max_relaxed, relaxed.dist[i]);
      for (std::size_t i = 0; i < node_count; ++i)
        phi[i] = relaxed.dist[i] == inf ? max_relaxed + 1.0 : relaxed.dist[i];
    }

    const double big_m = inst.scenarios[scenario].zone_total[zi];
    for (std::size_t r = 0; r < removable; ++r) {
      if (design[r] >= 0.5) continue;
      const Edge& edge = inst.edges[inst.removable[r]];
      const double slack =
          phi[edge.tail] - phi[edge.head] - weights[inst.removable[r]];
      duals.cut_coeffs[zi * removable + r] =
          slack > 0.0 ? big_m * slack : 0.0;
    }
  }
  return duals;
}

Cut make_optimality_cut(const NetworkInstance& inst,
                        std::span<const DualValues> per_scenario,
                        int scenario_tag) {
  const std::size_t removable = inst.removable_count();
  const std::size_t zone_count = inst.zone_count();
  Cut cut;
  cut.kind = CutKind::optimality;
  cut.includes_eta = true;
  cut.scenario = scenario_tag;
  std::vector<double> total(removable, 0.0);
  for (const DualValues& duals : per_scenario) {
    cut.rhs += duals.value;
    for (std::size_t zi = 0; zi < zone_count; ++zi)
      for (std::size_t r = 0; r < removable; ++r)
        total[r] += duals.cut_coeffs[zi * removable + r];
  }
  for (std::size_t r = 0; r < removable; ++r)
    if (total[r] != 0.0) cut.coeffs.emplace_back(static_cast<int>(r), total[r]);
  return cut;
}

std::optional<Cut> make_feasibility_cut(const NetworkInstance& inst,
                                        const InfeasibilityCertificate& cert,
                                        int scenario) {
  const std::size_t edge_count = inst.edge_count();
  const std::size_t origin_count = inst.origin_count();
  std::vector<std::uint8_t> inside(inst.node_count, 0);
  for (int node : cert.reachable) inside[node] = 1;
  const double big_m = inst.scenarios[scenario].zone_total[cert.zone_index];
  Cut cut;
  cut.kind = CutKind::feasibility;
  cut.scenario = -1;
  for (std::size_t e = 0; e < edge_count; ++e) {
    const Edge& edge = inst.edges[e];
    if (!inside[edge.tail] || inside[edge.head]) continue;
    const int r = inst.removable_index_of_edge[e];
    if (r < 0) return std::nullopt;  // permanent arc crosses: stale witness
    cut.coeffs.emplace_back(r, big_m);
  }
  for (std::size_t oi = 0; oi < origin_count; ++oi)
    if (inside[inst.origins[oi]])
      cut.rhs +=
          inst.demand(scenario, static_cast<int>(oi), cert.zone_index);
  if (cut.coeffs.empty() || cut.rhs <= 0.0) return std::nullopt;
  return cut;
}

std::optional<Cut> make_bridge_cut(const NetworkInstance& inst,
                                   const InfeasibilityCertificate& cert,
                                   std::span<const double> design, int steps) {
  const std::size_t edge_count = inst.edge_count();
  const std::size_t removable = inst.removable_count();
  std::vector<std::uint8_t> inside(inst.node_count, 0);
  for (int node : cert.reachable) inside[node] = 1;
  std::vector<std::uint8_t> chosen(removable, 0);
  std::vector<std::uint8_t> grow_from(inst.node_count, 0);
  bool any = false;
  for (std::size_t e = 0; e < edge_count; ++e) {
    const Edge& edge = inst.edges[e];
    if (!inside[edge.tail] || inside[edge.head]) continue;
    const int r = inst.removable_index_of_edge[e];
    if (r < 0 || design[r] >= 0.5) return std::nullopt;  // stale witness
    chosen[r] = 1;
    grow_from[edge.head] = 1;
    any = true;
  }
  if (!any) return std::nullopt;  // degenerate witness covering all nodes

  // Widen across additional closed removable arcs reachable from the heads
  // already collected; the cut only gains nonnegative terms, so it stays
  // valid while becoming harder to regenerate.
  for (int step = 1; step < steps; ++step) {
    std::vector<std::uint8_t> next(inst.node_count, 0);
    bool grew = false;
    for (std::size_t r = 0; r < removable; ++r) {
      if (chosen[r] || design[r] >= 0.5) continue;
      const Edge& edge = inst.edges[inst.removable[r]];
      if (!grow_from[edge.tail]) continue;
      chosen[r] = 1;
      next[edge.head] = 1;
      grew = true;
    }
    if (!grew) break;
    grow_from.swap(next);
  }

  Cut cut;
  cut.kind = CutKind::bridge;
  cut.scenario = -1;
  cut.rhs = 1.0;
  for (std::size_t r = 0; r < removable; ++r)
    if (chosen[r]) cut.coeffs.emplace_back(static_cast<int>(r), 1.0);
  return cut;
}

namespace {

// Exact master: minimize prices . y + sum of recourse bounds over the cut
// pool, by depth-first enumeration of the unfixed design variables with
// optimistic pruning (undecided arcs treated as open, which can only lower
// every cut's requirement since all coefficients are nonnegative).
class MasterSolver {
 public:
  MasterSolver(std::span<const double> prices, const DesignBounds& bounds,
               const std::vector<const Cut*>& optimality,
               const std::vector<const Cut*>& covers)
      : prices_(prices), covers_(covers) {
    const std::size_t count = prices.size();
    assign_.assign(count, -1);
    for (std::size_t r = 0; r < count; ++r) {
      if (bounds.fixed(r))
        assign_[r] = bounds.lower[r];
      else
        order_.push_back(static_cast<int>(r));
    }
    std::map<int, std::vector<const Cut*>> groups;
    for (const Cut* cut : optimality) groups[cut->scenario].push_back(cut);
    for (auto& [tag, cuts] : groups) eta_groups_.push_back(std::move(cuts));
  }

  bool solve() {
    best_value_ = std::numeric_limits<double>::infinity();
    std::vector<std::int8_t> saved = assign_;
    for (auto& a : assign_)
      if (a == -1) a = 1;
    if (covers_satisfied()) record_leaf();
    assign_ = std::move(saved);
    dfs(0);
    return best_value_ < std::numeric_limits<double>::infinity();
  }

  double value() const { return best_value_; }
  std::vector<double> design() const {
    std::vector<double> y(assign_.size(), 0.0);
    for (std::size_t r = 0; r < best_assign_.size(); ++r)
      y[r] = best_assign_[r] == 1 ? 1.0 : 0.0;
    return y;
  }

 private:
  // Sum of cut terms whose arcs are not decided closed; an upper bound on
  // the cut lhs of every completion of the current partial assignment.
  double optimistic_lhs(const Cut& cut) const {
    double total = 0.0;
    for (const auto& [arc, weight] : cut.coeffs)
      if (assign_[arc] != 0) total += weight;
    return total;
  }

  double exact_lhs(const Cut& cut) const {
    double total = 0.0;
    for (const auto& [arc, weight] : cut.coeffs)
      if (assign_[arc] == 1) total += weight;
    return total;
  }

  bool covers_satisfied() const {
    for (const Cut* cut : covers_)
      if (optimistic_lhs(*cut) < cut->rhs - 1e-12) return false;
    return true;
  }

  double decided_prices() const {
    double total = 0.0;
    for (std::size_t r = 0; r < assign_.size(); ++r)
      if (assign_[r] == 1) total += prices_[r];
    return total;
  }

  template <typename LhsFn>
  double eta_total(LhsFn lhs) const {
    double total = 0.0;
    for (const auto& group : eta_groups_) {
      double eta = 0.0;
      for (const Cut* cut : group)
        eta = std::max(eta, cut->rhs - (this->*lhs)(*cut));
      total += eta;
    }
    return total;
  }

  void record_leaf() {
    const double value =
        decided_prices() + eta_total(&MasterSolver::exact_lhs);
    if (value < best_value_) {
      best_value_ = value;
      best_assign_.assign(assign_.begin(), assign_.end());
    }
  }

  void dfs(std::size_t depth) {
    if (!covers_satisfied()) return;
    const double bound =
        decided_prices() + eta_total(&MasterSolver::optimistic_lhs);
    if (bound >= best_value_) return;
    if (depth == order_.size()) {
      record_leaf();
      return;
    }
    const int r = order_[depth];
    assign_[r] = 0;
    dfs(depth + 1);
    assign_[r] = 1;
    dfs(depth + 1);
    assign_[r] = -1;
  }

  std::span<const double> prices_;
  const std::vector<const Cut*>& covers_;
  std::vector<std::vector<const Cut*>> eta_groups_;
  std::vector<int> order_;
  std::vector<std::int8_t> assign_;
  std::vector<std::int8_t> best_assign_;
  double best_value_ = std::numeric_limits<double>::infinity();
};

}  // namespace

IfwSolution solve_benders_lmo(const NetworkInstance& inst,
                              std::span<const double> gradients,
                              std::span<const double> prices,
                              const DesignBounds& bounds, CutPool& pool,
                              const BendersConfig& config,
                              BendersTrace* trace) {
  const std::size_t edge_count = inst.edge_count();
  const std::size_t scenario_count = inst.scenario_count();
  const std::size_t removable = inst.removable_count();
  if (gradients.size() != scenario_count * edge_count)
    throw std::invalid_argument("solve_benders_lmo: gradient size mismatch");
  if (prices.size() != removable)
    throw std::invalid_argument("solve_benders_lmo: price size mismatch");
  bounds.validate(removable);
  for (double price : prices)
    if (price < 0.0)
      throw std::invalid_argument("solve_benders_lmo: negative price");

  const auto deadline = deadline_for(config.time_budget_s);

  // The widest design the bounds allow must route every demanded pair;
  // valid cuts never exclude it, so the master below always has a
  // candidate once this passes.
  std::vector<double> widest(removable, 1.0);
  for (std::size_t r = 0; r < removable; ++r)
    widest[r] = bounds.upper[r] ? 1.0 : 0.0;
  {
    const std::vector<bool> closed = closed_mask(inst, widest);
    for (std::size_t s = 0; s < scenario_count; ++s)
      all_or_nothing(inst, gradients.subspan(s * edge_count, edge_count),
                     &closed, static_cast<int>(s));
  }

  CutPool optimality;  // weight-dependent, this call only
  std::vector<const Cut*> cover_cuts;
  auto refresh_covers = [&] {
    cover_cuts.clear();
    for (const Cut& cut : pool.cuts())
      if (cut.kind != CutKind::optimality) cover_cuts.push_back(&cut);
  };

  std::vector<double> best_design;
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<DualValues> duals(scenario_count);
  bool certified = false;

  for (long iteration = 0; iteration < config.max_iterations; ++iteration) {
    if (iteration > 0 && Clock::now() >= deadline) break;

    std::vector<const Cut*> optimality_view;
    for (const Cut& cut : optimality.cuts()) optimality_view.push_back(&cut);
    refresh_covers();
    MasterSolver master(prices, bounds, optimality_view, cover_cuts);
    if (!master.solve())
      throw std::logic_error("solve_benders_lmo: master lost all candidates");
    const double master_value = master.value();
    const std::vector<double> candidate = master.design();
    if (trace) trace->master_values.push_back(master_value);

    bool feasible = true;
    for (std::size_t s = 0; s < scenario_count && feasible; ++s) {
      DualOutcome outcome = dual_subproblem(
          inst, gradients.subspan(s * edge_count, edge_count), candidate,
          static_cast<int>(s), config.rule);
      if (auto* cert = std::get_if<InfeasibilityCertificate>(&outcome)) {
        feasible = false;
        if (auto cut = make_feasibility_cut(inst, *cert, static_cast<int>(s))) {
          cut->iteration = iteration;
          if (pool.add(*cut) && config.on_cut) config.on_cut(*cut, candidate);
        }
        if (auto cut =
                make_bridge_cut(inst, *cert, candidate, config.bridge_steps)) {
          cut->iteration = iteration;
          if (pool.add(*cut) && config.on_cut) config.on_cut(*cut, candidate);
        }
      } else {
        duals[s] = std::move(std::get<DualValues>(outcome));
      }
    }
    if (!feasible) {
      if (trace)
        trace->candidate_values.push_back(
            std::numeric_limits<double>::infinity());
      continue;
    }

    double price_part = 0.0;
    for (std::size_t r = 0; r < removable; ++r)
      if (candidate[r] >= 0.5) price_part += prices[r];
    double recourse = 0.0;
    for (std::size_t s = 0; s < scenario_count; ++s) recourse += duals[s].value;
    const double candidate_value = price_part + recourse;
    if (trace) trace->candidate_values.push_back(candidate_value);
    if (candidate_value < best_value) {
      best_value = candidate_value;
      best_design = candidate;
    }
    if (master_value >=
        candidate_value - config.tolerance * (1.0 + std::fabs(candidate_value))) {
      certified = true;
      break;
    }

    if (config.multi_cut) {
      for (std::size_t s = 0; s < scenario_count; ++s) {
        Cut cut = make_optimality_cut(inst, {&duals[s], 1},
                                      static_cast<int>(s));
        cut.iteration = iteration;
        if (optimality.add(cut) && config.on_cut) config.on_cut(cut, candidate);
      }
    } else {
      Cut cut = make_optimality_cut(inst, duals, -1);
      cut.iteration = iteration;
      if (optimality.add(cut) && config.on_cut) config.on_cut(cut, candidate);
    }
  }

  if (best_design.empty()) {
    // Budget expired before any candidate was evaluated; fall back to the
    // widest design, which the pre-check proved routable.
    best_design = widest;
  }

  IfwSolution solution;
  solution.design = best_design;
  solution.exact = certified;
  solution.flows.reserve(scenario_count);
  const std::vector<bool> closed = closed_mask(inst, best_design);
  double core = 0.0;
  for (std::size_t s = 0; s < scenario_count; ++s) {
    FlowState flow =
        all_or_nothing(inst, gradients.subspan(s * edge_count, edge_count),
                       &closed, static_cast<int>(s));
    core += kernels::dot(gradients.data() + s * edge_count,
                         flow.aggregate.data(), edge_count);
    solution.flows.push_back(std::move(flow));
  }
  double price_sum = 0.0;
  for (std::size_t r = 0; r < removable; ++r)
    if (best_design[r] >= 0.5) price_sum += prices[r];
  solution.value = core + price_sum;
  return solution;
}

void BendersLmo::set_bounds(DesignBounds bounds) {
  bounds.validate(layout_.removable_count);
  bounds_ = std::move(bounds);
}

LmoResult BendersLmo::minimize(std::span<const double> gradient) {
  if (gradient.size() != layout_.dimension())
    throw std::invalid_argument("BendersLmo: gradient size mismatch");
  ++calls_;
  const std::size_t edge_count = layout_.edge_count;
  const std::size_t scenario_count = layout_.scenario_count;
  std::vector<double> weights(scenario_count * edge_count);
  for (std::size_t s = 0; s < scenario_count; ++s) {
    const std::size_t offset = layout_.flow_offset(s, 0);
    std::copy_n(gradient.data() + offset, edge_count,
                weights.data() + s * edge_count);
  }
  const std::span<const double> prices =
      gradient.subspan(layout_.design_offset(), layout_.removable_count);
  const IfwSolution solution = solve_benders_lmo(
      *inst_, weights, prices, bounds_, pool_, config_, nullptr);
  LmoResult result;
  result.vertex = layout_.pack(solution.flows, solution.design);
  result.value = solution.value;
  result.exact = solution.exact;
  return result;
}

}  // namespace netdesign
