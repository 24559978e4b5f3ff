#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"

#include "netdesign/bpcg.hpp"
#include "netdesign/design_problem.hpp"
#include "netdesign/instance.hpp"
#include "netdesign/kernels.hpp"
#include "netdesign/ndlmo_penalty.hpp"
#include "netdesign/rng.hpp"
#include "netdesign/shortest_path.hpp"
#include "support/oracles.hpp"
#include "support/toy.hpp"

using namespace netdesign;
using namespace netdesign::testing;

namespace {

// Single removable edge 0->1 into one zone with total demand 2 (M = 2),
// so the textbook numbers x = 3, M = 2 are trivial to stage.
NetworkInstance two_origin_edge_instance() {
  NetworkInstance inst;
  inst.node_count = 2;
  inst.edges = {{0, 1}};
  inst.alpha = {0.0};
  inst.beta = {1.0};
  inst.gamma = {0.03};
  inst.rho = {5.0};
  inst.zones = {1};
  inst.origins = {0};
  inst.removable = {0};
  inst.prices = {5.0};
  DemandTable t;
  t.demand = {2.0};
  attach_uniform_scenarios(inst, {t});
  inst.finalize();
  return inst;
}

FlowState flow_with(const NetworkInstance& inst, std::vector<double> per_dest) {
  FlowState f;
  f.per_destination = std::move(per_dest);
  f.recompute_aggregate(inst.zone_count(), inst.edge_count());
  return f;
}

}  // namespace

TEST_CASE("penalty gradients reproduce the reference numbers") {
  NetworkInstance inst = two_origin_edge_instance();

  SUBCASE("no violation gives zero gradients") {
    FlowState f = flow_with(inst, {1.5});
    PenaltyGradients pg = penalty_gradients(inst, f, {1.0});
    CHECK(pg.design == std::vector<double>{0.0});
    CHECK(pg.flow == std::vector<double>{0.0});
    // Boundary x = M y contributes nothing either.
    FlowState boundary = flow_with(inst, {2.0});
    pg = penalty_gradients(inst, boundary, {1.0});
    CHECK(pg.design == std::vector<double>{0.0});
  }

  SUBCASE("doubled rule at x=3, M=2, y=0") {
    FlowState f = flow_with(inst, {3.0});
    PenaltyGradients pg = penalty_gradients(inst, f, {0.0});
    CHECK(pg.flow[0] == doctest::Approx(5196.152422).epsilon(1e-9));
    CHECK(pg.design[0] == doctest::Approx(-10392.304845).epsilon(1e-9));
    // The aggregation identity is exact, not approximate.
    CHECK(pg.design[0] == -2.0 * pg.flow[0]);
  }

  SUBCASE("p = 2 with the derivative factor recovers the piecewise form") {
    FlowState f = flow_with(inst, {3.0});
    PenaltyConfig cfg;
    cfg.p = 2.0;
    cfg.factor_two = false;
    PenaltyGradients pg = penalty_gradients(inst, f, {0.5}, cfg);
    const double excess = 3.0 - 2.0 * 0.5;  // x - M y
    CHECK(pg.flow[0] == doctest::Approx(cfg.mu * 2.0 * excess));
    CHECK(pg.design[0] == doctest::Approx(-cfg.mu * 2.0 * 2.0 * excess));
  }

  SUBCASE("config validation") {
    FlowState f = flow_with(inst, {1.0});
    PenaltyConfig bad;
    bad.mu = 0.0;
    CHECK_THROWS_AS(penalty_gradients(inst, f, {1.0}, bad),
                    std::invalid_argument);
    bad = PenaltyConfig{};
    bad.p = 1.0;
    CHECK_THROWS_AS(penalty_gradients(inst, f, {1.0}, bad),
                    std::invalid_argument);
  }
}

TEST_CASE("penalty gradients match finite differences of the penalized objective") {
  SplitMix64 rng(71);
  RandomInstanceParams prm;
  prm.removable_count = 4;
  NetworkInstance inst = random_instance(rng, prm);
  const std::size_t E = inst.edges.size(), Z = inst.zones.size();

  // A flow with violations on some removable arcs and slack on others.
  std::vector<double> per_dest(Z * E);
  for (double& v : per_dest) v = rng.uniform(0.0, 3.0);
  for (std::size_t r = 0; r < inst.removable.size(); ++r) {
    const std::size_t e = static_cast<std::size_t>(inst.removable[r]);
    if (r % 2 == 0) per_dest[e] += 30.0;  // well past any M^z y
  }
  FlowState flow = flow_with(inst, per_dest);
  std::vector<double> design = {0.3, 0.0, 0.8, 1.0};

  PenaltyConfig cfg;
  cfg.factor_two = false;  // the derivative of mu*max(., 0)^p
  PenaltyGradients pg = penalty_gradients(inst, flow, design, cfg);

  auto value = [&](const FlowState& f, const std::vector<double>& y) {
    return penalized_objective(inst, f, y, cfg.mu, cfg.p);
  };

  // Design coordinates: d/dy_r = prices_r + g_r.
  for (std::size_t r = 0; r < design.size(); ++r) {
    const double h = 1e-6;
    std::vector<double> up = design, dn = design;
    up[r] += h;
    dn[r] -= h;
    const double fd = (value(flow, up) - value(flow, dn)) / (2 * h);
    CHECK(inst.prices[r] + pg.design[r] ==
          doctest::Approx(fd).epsilon(1e-5));
  }

  // Flow coordinates: d/dx_e^z = marginal_e(aggregate) + h_e^z.
  std::vector<double> marginal(E);
  gradient(inst, flow.aggregate, marginal);
  SplitMix64 pick(5);
  for (int probe = 0; probe < 30; ++probe) {
    const std::size_t z = static_cast<std::size_t>(pick.below(Z));
    const std::size_t e = static_cast<std::size_t>(pick.below(E));
    const double h = 1e-6 * std::max(1.0, flow.per_destination[z * E + e]);
    FlowState up = flow, dn = flow;
    up.per_destination[z * E + e] += h;
    dn.per_destination[z * E + e] -= h;
    up.recompute_aggregate(static_cast<int>(Z), static_cast<int>(E));
    dn.recompute_aggregate(static_cast<int>(Z), static_cast<int>(E));
    const double fd = (value(up, design) - value(dn, design)) / (2 * h);
    CHECK(marginal[e] + pg.flow[z * E + e] ==
          doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("design lmo follows the sign rule and the bounds") {
  DesignBounds bounds = DesignBounds::free_box(3);
  std::vector<double> prices = {5.0, 2.0, 1.0};

  CHECK(solve_design_lmo(prices, std::vector<double>{0.0, 0.0, 0.0}, bounds) ==
        std::vector<double>{0.0, 0.0, 0.0});
  CHECK(solve_design_lmo(prices, std::vector<double>{-10392.3, -2.0, -1.5},
                         bounds) == std::vector<double>{1.0, 0.0, 1.0});
  // A zero coefficient stays at the lower bound.
  CHECK(solve_design_lmo(prices, std::vector<double>{-5.0, -2.0, -1.0},
                         bounds) == std::vector<double>{0.0, 0.0, 0.0});

  bounds.lower = {1, 0, 0};
  bounds.upper = {1, 0, 1};
  CHECK(solve_design_lmo(prices, std::vector<double>{0.0, -7.0, -3.0},
                         bounds) == std::vector<double>{1.0, 0.0, 1.0});

  // Exhaustive check: the sign rule minimizes over every binary design in
  // the box.
  SplitMix64 rng(81);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> r(3), g(3);
    for (auto& v : r) v = rng.uniform(0.0, 5.0);
    for (auto& v : g) v = -rng.uniform(0.0, 8.0);
    DesignBounds box = DesignBounds::free_box(3);
    if (trial % 2 == 1) {
      box.lower[trial % 3] = box.upper[trial % 3] =
          static_cast<std::uint8_t>(rng.uniform() < 0.5 ? 0 : 1);
    }
    std::vector<double> got = solve_design_lmo(r, g, box);
    double got_value = 0.0;
    for (std::size_t i = 0; i < 3; ++i) got_value += (r[i] + g[i]) * got[i];
    for (int mask = 0; mask < 8; ++mask) {
      std::vector<double> y(3);
      bool inside = true;
      for (std::size_t i = 0; i < 3; ++i) {
        y[i] = (mask >> i) & 1 ? 1.0 : 0.0;
        inside = inside && y[i] >= box.lower[i] && y[i] <= box.upper[i];
      }
      if (!inside) continue;
      double v = 0.0;
      for (std::size_t i = 0; i < 3; ++i) v += (r[i] + g[i]) * y[i];
      CHECK(got_value <= v + 1e-15);
    }
  }
}

TEST_CASE("flow lmo routes per destination on shifted weights") {
  SplitMix64 rng(91);
  RandomInstanceParams prm;
  prm.removable_count = 3;
  prm.scenario_count = 2;
  NetworkInstance inst = random_instance(rng, prm);
  const std::size_t E = inst.edges.size(), Z = inst.zones.size();
  std::vector<double> marginal(E);
  for (double& v : marginal) v = rng.uniform(0.5, 4.0);

  SUBCASE("zero shift reduces to the plain all-or-nothing answer") {
    std::vector<double> zero(Z * E, 0.0);
    for (int s = 0; s < 2; ++s) {
      FlowState via_lmo = solve_flow_lmo(inst, marginal, zero, s);
      FlowState direct = all_or_nothing(inst, marginal, nullptr, s);
      CHECK(via_lmo.per_destination == direct.per_destination);
    }
  }

  SUBCASE("a destination-specific spike diverts only that destination") {
    // Find an arc used by the routing for the first zone.
    FlowState base = solve_flow_lmo(inst, marginal,
                                    std::vector<double>(Z * E, 0.0));
    std::size_t arc = E;
    for (std::size_t e = 0; e < E; ++e) {
      if (base.per_destination[e] > 0.0) {
        arc = e;
        break;
      }
    }
    REQUIRE(arc < E);
    std::vector<double> h(Z * E, 0.0);
    h[arc] = 1e6;  // zone 0 only
    FlowState shifted = solve_flow_lmo(inst, marginal, h);
    CHECK(shifted.per_destination[arc] == 0.0);
    // Other destinations keep their relative weights, hence their routes.
    for (std::size_t z = 1; z < Z; ++z) {
      for (std::size_t e = 0; e < E; ++e) {
        CHECK(shifted.per_destination[z * E + e] ==
              base.per_destination[z * E + e]);
      }
    }
  }

  SUBCASE("per-destination cost equals the path-enumeration bound") {
    std::vector<double> h(Z * E);
    for (double& v : h) v = rng.uniform() < 0.7 ? 0.0 : rng.uniform(0.0, 3.0);
    FlowState flow = solve_flow_lmo(inst, marginal, h, 1);
    double expected = 0.0;
    std::vector<double> weights(E);
    for (std::size_t z = 0; z < Z; ++z) {
      for (std::size_t e = 0; e < E; ++e) weights[e] = marginal[e] + h[z * E + e];
      for (int oi = 0; oi < inst.origin_count(); ++oi) {
        const double d = inst.demand(1, oi, static_cast<int>(z));
        if (d <= 0.0) continue;
        expected += d * min_path_weight(inst, weights, inst.origins[oi],
                                        inst.zones[z]);
      }
    }
    double got = 0.0;
    for (std::size_t z = 0; z < Z; ++z) {
      for (std::size_t e = 0; e < E; ++e) {
        got += (marginal[e] + h[z * E + e]) * flow.per_destination[z * E + e];
      }
    }
    CHECK(got == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("penalized objective value, gradient, and slope are consistent") {
  SplitMix64 rng(101);
  RandomInstanceParams prm;
  prm.removable_count = 3;
  prm.scenario_count = 2;
  prm.mixed_powers = true;
  NetworkInstance inst = random_instance(rng, prm);
  PenaltyConfig cfg;
  cfg.mu = 50.0;  // keep the penalty commensurate for finite differences
  PenalizedDesignObjective objective(inst, cfg);
  const ProblemLayout& layout = objective.layout();

  std::vector<double> point(layout.dimension());
  for (double& v : point) v = rng.uniform(0.0, 4.0);
  for (std::size_t r = 0; r < layout.removable_count; ++r) {
    point[layout.design_offset() + r] = rng.uniform(0.0, 1.0);
  }

  SUBCASE("single-scenario value matches the per-flow helper") {
    RandomInstanceParams det = prm;
    det.scenario_count = 1;
    SplitMix64 rng2(102);
    NetworkInstance inst1 = random_instance(rng2, det);
    PenalizedDesignObjective obj1(inst1, cfg);
    const ProblemLayout& l1 = obj1.layout();
    std::vector<double> pt(l1.dimension());
    for (double& v : pt) v = rng2.uniform(0.0, 5.0);
    FlowState flow = l1.extract_flow(pt, 0);
    auto y = l1.design(std::span<const double>(pt));
    const double expected = penalized_objective(
        inst1, flow, std::vector<double>(y.begin(), y.end()), cfg.mu, cfg.p);
    CHECK(obj1.value(pt) == doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("gradient matches central differences") {
    std::vector<double> grad(layout.dimension());
    objective.gradient(point, grad);
    SplitMix64 pick(7);
    for (int probe = 0; probe < 40; ++probe) {
      std::size_t i = static_cast<std::size_t>(pick.below(layout.dimension()));
      const double h = 1e-6 * std::max(1.0, std::abs(point[i]));
      std::vector<double> up = point, dn = point;
      up[i] += h;
      dn[i] -= h;
      const double fd = (objective.value(up) - objective.value(dn)) / (2 * h);
      CHECK(grad[i] == doctest::Approx(fd).epsilon(2e-5));
    }
  }

  SUBCASE("directional derivative equals the gradient dot along the segment") {
    std::vector<double> other(layout.dimension());
    for (double& v : other) v = rng.uniform(0.0, 4.0);
    std::vector<double> dir(layout.dimension());
    for (std::size_t i = 0; i < dir.size(); ++i) dir[i] = other[i] - point[i];
    auto slope = objective.derivative_along(point, dir);
    std::vector<double> grad(layout.dimension());
    for (double t : {0.0, 0.4, 0.9}) {
      std::vector<double> at(layout.dimension());
      for (std::size_t i = 0; i < at.size(); ++i) at[i] = point[i] + t * dir[i];
      objective.gradient(at, grad);
      CHECK(slope(t) ==
            doctest::Approx(kernels::dot(grad.data(), dir.data(), dir.size()))
                .epsilon(1e-9));
    }
  }
}

TEST_CASE("penalty oracle decouples into design and flow parts") {
  SplitMix64 rng(111);
  RandomInstanceParams prm;
  prm.removable_count = 4;
  prm.scenario_count = 2;
  NetworkInstance inst = random_instance(rng, prm);
  PenaltyConfig cfg;
  PenalizedDesignObjective objective(inst, cfg);
  const ProblemLayout& layout = objective.layout();

  std::vector<double> point(layout.dimension());
  for (double& v : point) v = rng.uniform(0.0, 6.0);
  for (std::size_t r = 0; r < layout.removable_count; ++r) {
    point[layout.design_offset() + r] = rng.uniform(0.0, 1.0);
  }
  std::vector<double> grad(layout.dimension());
  objective.gradient(point, grad);

  PenaltyLmo lmo(inst);
  LmoResult res = lmo.minimize(grad);
  CHECK(res.exact);
  CHECK(res.vertex.size() == layout.dimension());

  // Design part: sign rule on the gradient's design slots.
  auto gy = std::span<const double>(grad).subspan(layout.design_offset(),
                                                  layout.removable_count);
  std::vector<double> design_part = solve_design_lmo(
      gy, std::vector<double>(layout.removable_count, 0.0), lmo.bounds());
  auto vy = layout.design(std::span<const double>(res.vertex));
  CHECK(std::vector<double>(vy.begin(), vy.end()) == design_part);

  // Flow part: per-scenario per-zone routing on the gradient blocks, which
  // for the penalized objective are marginal + h^z.
  const std::size_t E = layout.edge_count;
  double recombined = kernels::dot(gy.data(), design_part.data(),
                                   layout.removable_count);
  for (std::size_t s = 0; s < layout.scenario_count; ++s) {
    std::vector<double> marginal(grad.begin() +
                                     static_cast<std::ptrdiff_t>(
                                         layout.flow_offset(s, 0)),
                                 grad.begin() +
                                     static_cast<std::ptrdiff_t>(
                                         layout.flow_offset(s, 0) + E));
    std::vector<double> h(layout.zone_count * E);
    for (std::size_t z = 0; z < layout.zone_count; ++z) {
      for (std::size_t e = 0; e < E; ++e) {
        h[z * E + e] = grad[layout.flow_offset(s, z) + e] - marginal[e];
      }
    }
    FlowState flow = solve_flow_lmo(inst, marginal, h, static_cast<int>(s));
    auto block = layout.scenario_flows(res.vertex, s);
    CHECK(std::vector<double>(block.begin(), block.end()) ==
          flow.per_destination);
    for (std::size_t z = 0; z < layout.zone_count; ++z) {
      recombined += kernels::dot(grad.data() + layout.flow_offset(s, z),
                                 flow.per_destination.data() + z * E, E);
    }
  }
  CHECK(res.value == doctest::Approx(recombined).epsilon(1e-12));

  SUBCASE("bounds gate the design slots") {
    DesignBounds tight = DesignBounds::free_box(layout.removable_count);
    tight.lower[0] = tight.upper[0] = 1;
    tight.lower[1] = tight.upper[1] = 0;
    lmo.set_bounds(tight);
    LmoResult forced = lmo.minimize(grad);
    auto fy = layout.design(std::span<const double>(forced.vertex));
    CHECK(fy[0] == 1.0);
    CHECK(fy[1] == 0.0);
  }
}

TEST_CASE("penalty relaxation solves to a certificate and respects coupling in the limit") {
  SplitMix64 rng(121);
  RandomInstanceParams prm;
  prm.removable_count = 3;
  prm.scenario_count = 2;
  prm.price_lo = 0.1;
  prm.price_hi = 0.5;  // cheap arcs: the relaxation should keep most open
  NetworkInstance inst = random_instance(rng, prm);
  PenaltyConfig cfg;
  PenalizedDesignObjective objective(inst, cfg);
  const ProblemLayout& layout = objective.layout();

  std::vector<FlowState> flows;
  for (int s = 0; s < inst.scenario_count(); ++s) {
    flows.push_back(all_or_nothing(inst, inst.beta, nullptr, s));
  }
  std::vector<double> ones(layout.removable_count, 1.0);
  std::vector<double> start = layout.pack(flows, ones);

  PenaltyLmo lmo(inst);
  BpcgConfig config;
  config.gap_tol_rel = 0.0;
  config.gap_tol_abs = 1e-6;
  SolveReport report = bpcg_solve(objective, lmo, start, config);

  CHECK(report.certified);
  CHECK(report.dual_gap <= 1e-6);
  CHECK(report.objective <= objective.value(start) + 1e-12);
  CHECK(point_conservation_violation(inst, layout, report.iterate) <= 1e-9);
  // mu = 1000 keeps the optimum's coupling violation tiny: the penalty
  // gradient dwarfs any congestion saving once the excess is visible.
  double worst = 0.0;
  auto y = layout.design(std::span<const double>(report.iterate));
  for (std::size_t s = 0; s < layout.scenario_count; ++s) {
    for (std::size_t z = 0; z < layout.zone_count; ++z) {
      for (std::size_t r = 0; r < layout.removable_count; ++r) {
        const std::size_t e = static_cast<std::size_t>(inst.removable[r]);
        worst = std::max(worst,
                         report.iterate[layout.flow_offset(s, z) + e] -
                             inst.scenarios[s].zone_total[z] * y[r]);
      }
    }
  }
  CHECK(worst <= 0.05);
}
