#include <cmath>
#include <vector>

#include "doctest.h"
#include "netdesign/instance.hpp"
#include "netdesign/rng.hpp"
#include "support/toy.hpp"

using namespace netdesign;
using testing::random_instance;
using testing::RandomInstanceParams;

namespace {

// Simpson-rule quadrature of the BPR travel time fft*(1 + b*(s/C)^P) over
// [0, x]; independent oracle for the closed-form integral coefficients.
double bpr_integral(const BprRecord& r, double x, int panels = 4000) {
  auto t = [&](double s) {
    return r.free_flow_time * (1.0 + r.b * std::pow(s / r.capacity, r.power));
  };
  double h = x / (2. * panels), acc = t(0.0) + t(x);
  for (int i = 1; i < 2 * panels; ++i)
    acc += t(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

double eval_cost(const EdgeCostCoeffs& c, double x) {
  return c.alpha + c.beta * x + c.gamma * std::pow(x, c.rho);
}

}  // namespace

TEST_CASE("derive_cost_coeffs integrates the BPR travel time") {
  SUBCASE("classic coefficients") {
    BprRecord r{1.0, 0.15, 1.0, 4.0, 0.0};
    EdgeCostCoeffs c = derive_cost_coeffs(r);
    CHECK(c.alpha == 0.0);
    CHECK(c.beta == 1.0);
    CHECK(c.gamma == doctest::Approx(0.03).epsilon(1e-15));
    CHECK(c.rho == 5.0);
    CHECK(eval_cost(c, 1.0) == doctest::Approx(1.03).epsilon(1e-14));
    CHECK(eval_cost(c, 1.0) ==
          doctest::Approx(bpr_integral(r, 1.0)).epsilon(1e-10));
  }
  SUBCASE("quadrature agreement on random records") {
    SplitMix64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      BprRecord r;
      r.free_flow_time = rng.uniform(0.5, 8.0);
      r.b = rng.uniform(0.0, 0.4);
      r.capacity = rng.uniform(1.0, 15.0);
      r.power = trial % 4 == 0 ? rng.uniform(1.2, 6.0) : 4.0;
      r.constant = rng.uniform(0.0, 3.0);
      EdgeCostCoeffs c = derive_cost_coeffs(r);
      double x = rng.uniform(0.5, 25.0);
      CHECK(eval_cost(c, x) == doctest::Approx(r.constant +
                                               bpr_integral(r, x))
                                   .epsilon(1e-9));
    }
  }
  SUBCASE("b = 0 keeps the cost linear") {
    EdgeCostCoeffs c = derive_cost_coeffs({2.0, 0.0, 3.0, 4.0, 0.0});
    CHECK(c.gamma == 0.0);
    CHECK(c.beta == 2.0);
  }
  SUBCASE("power 0 folds the constant travel time into beta") {
    EdgeCostCoeffs c = derive_cost_coeffs({1.0, 0.15, 3.0, 0.0, 0.5});
    CHECK(c.beta == doctest::Approx(1.15).epsilon(1e-15));
    CHECK(c.gamma == 0.0);
    CHECK(c.rho > 1.0);
    CHECK(c.alpha == 0.5);
  }
}

TEST_CASE("objective evaluates the summed polynomial cost") {
  NetworkInstance inst = testing::single_edge_instance();
  CHECK(objective(inst, std::vector<double>{0.0}) == 0.0);
  CHECK(objective(inst, std::vector<double>{1.0}) ==
        doctest::Approx(1.03).epsilon(1e-14));

  SUBCASE("zero flow returns the constant term") {
    SplitMix64 rng(3);
    NetworkInstance rand_inst = random_instance(rng);
    std::vector<double> zero(static_cast<std::size_t>(rand_inst.edge_count()),
                             0.0);
    double alpha_sum = 0.0;
    for (double a : rand_inst.alpha) alpha_sum += a;
    CHECK(objective(rand_inst, zero) ==
          doctest::Approx(alpha_sum).epsilon(1e-14));
  }

  SUBCASE("convexity probe") {
    SplitMix64 rng(5);
    NetworkInstance rand_inst = random_instance(rng);
    for (int trial = 0; trial < 25; ++trial) {
      auto a = testing::random_aggregate(rng, rand_inst);
      auto b = testing::random_aggregate(rng, rand_inst);
      std::vector<double> mid(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) mid[i] = 0.5 * (a[i] + b[i]);
      CHECK(objective(rand_inst, mid) <=
            0.5 * (objective(rand_inst, a) + objective(rand_inst, b)) + 1e-9);
    }
  }

  SUBCASE("monotone under elementwise increase") {
    SplitMix64 rng(6);
    NetworkInstance rand_inst = random_instance(rng);
    for (int trial = 0; trial < 25; ++trial) {
      auto a = testing::random_aggregate(rng, rand_inst);
      auto b = a;
      for (double& v : b) v += rng.uniform(0.0, 5.0);
      CHECK(objective(rand_inst, a) <= objective(rand_inst, b) + 1e-12);
    }
  }
}

TEST_CASE("gradient equals marginal travel time") {
  NetworkInstance inst = testing::single_edge_instance();
  std::vector<double> g;
  gradient(inst, std::vector<double>{0.0}, g);
  CHECK(g[0] == 1.0);  // free-flow time
  gradient(inst, std::vector<double>{1.0}, g);
  CHECK(g[0] == doctest::Approx(1.15).epsilon(1e-15));  // fft*(1+B)

  SUBCASE("matches the BPR travel time when the constant is zero") {
    BprRecord r{3.0, 0.2, 7.0, 4.0, 0.0};
    NetworkInstance one;
    one.node_count = 2;
    one.edges = {{0, 1}};
    EdgeCostCoeffs c = derive_cost_coeffs(r);
    one.alpha = {c.alpha};
    one.beta = {c.beta};
    one.gamma = {c.gamma};
    one.rho = {c.rho};
    one.zones = {1};
    one.origins = {0};
    DemandTable t;
    t.demand = {1.0};
    testing::attach_uniform_scenarios(one, {t});
    one.finalize();
    SplitMix64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
      double x = rng.uniform(0.0, 30.0);
      gradient(one, std::vector<double>{x}, g);
      double travel_time =
          r.free_flow_time * (1.0 + r.b * std::pow(x / r.capacity, r.power));
      CHECK(g[0] == doctest::Approx(travel_time).epsilon(1e-12));
    }
  }
}

TEST_CASE("gradient matches central finite differences") {
  SplitMix64 rng(13);
  for (int inst_id = 0; inst_id < 5; ++inst_id) {
    RandomInstanceParams prm;
    prm.mixed_powers = inst_id % 2 == 1;
    NetworkInstance inst = random_instance(rng, prm);
    for (int trial = 0; trial < 10; ++trial) {
      auto x = testing::random_aggregate(rng, inst, 0.5, 15.0);
      std::vector<double> g;
      gradient(inst, x, g);
      const double h = 1e-5;
      for (int e = 0; e < inst.edge_count(); ++e) {
        auto hi = x, lo = x;
        hi[e] += h;
        lo[e] -= h;
        double fd = (objective(inst, hi) - objective(inst, lo)) / (2 * h);
        CHECK(std::abs(g[e] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST_CASE("penalized objective adds prices and coupling penalties") {
  // 2 nodes, one fixed edge and one removable edge, one zone with M = 2.
  NetworkInstance inst;
  inst.node_count = 2;
  inst.edges = {{0, 1}, {0, 1}};
  inst.alpha = {0.0, 0.0};
  inst.beta = {1.0, 1.0};
  inst.gamma = {0.0, 0.0};
  inst.rho = {2.0, 2.0};
  inst.zones = {1};
  inst.origins = {0};
  DemandTable t;
  t.demand = {2.0};
  testing::attach_uniform_scenarios(inst, {t});
  inst.removable = {1};
  inst.prices = {7.0};
  inst.finalize();

  FlowState flow;
  flow.per_destination = {0.0, 3.0};  // destination block over both edges
  flow.recompute_aggregate(1, 2);

  SUBCASE("violated coupling") {
    // x - M*y = 3 on the closed removable edge: penalty mu * 3^p.
    double value = penalized_objective(inst, flow, {0.0}, 1000.0, 1.5);
    double expected = objective(inst, flow) + 1000.0 * std::pow(3.0, 1.5);
    CHECK(value == doctest::Approx(expected).epsilon(1e-14));
    CHECK(1000.0 * std::pow(3.0, 1.5) ==
          doctest::Approx(5196.152).epsilon(1e-6));
  }
  SUBCASE("doubling mu doubles only the penalty term") {
    double base = objective(inst, flow) + 7.0 * 0.0;
    double v1 = penalized_objective(inst, flow, {0.0}, 1000.0, 1.5);
    double v2 = penalized_objective(inst, flow, {0.0}, 2000.0, 1.5);
    CHECK(v2 - base == doctest::Approx(2.0 * (v1 - base)).epsilon(1e-12));
  }
  SUBCASE("satisfied coupling equals objective plus prices") {
    double value = penalized_objective(inst, flow, {1.0}, 1000.0, 1.5);
    // y = 1: x - M = 1 > 0 still violated. Use a larger design bound via
    // smaller flow instead.
    FlowState ok;
    ok.per_destination = {1.5, 0.5};
    ok.recompute_aggregate(1, 2);
    value = penalized_objective(inst, ok, {1.0}, 1000.0, 1.5);
    CHECK(value == doctest::Approx(objective(inst, ok) + 7.0).epsilon(1e-14));
    value = penalized_objective(inst, ok, {0.25}, 1000.0, 1.5);
    CHECK(value ==
          doctest::Approx(objective(inst, ok) + 0.25 * 7.0).epsilon(1e-14));
  }
}

TEST_CASE("constraint violation scans closed removable arcs") {
  SplitMix64 rng(17);
  RandomInstanceParams prm;
  prm.removable_count = 5;
  NetworkInstance inst = random_instance(rng, prm);
  const int E = inst.edge_count();
  const int Z = inst.zone_count();

  std::vector<FlowState> flows(2);
  for (FlowState& f : flows) {
    f.per_destination.resize(static_cast<std::size_t>(Z) * E);
    for (double& v : f.per_destination) v = rng.uniform(0.0, 4.0);
    f.recompute_aggregate(Z, E);
  }

  std::vector<double> design(inst.removable.size());
  for (double& y : design) y = rng.below(2) ? 1.0 : 0.0;

  // Brute-force oracle.
  double expected = 0.0;
  for (const FlowState& f : flows)
    for (int z = 0; z < Z; ++z)
      for (std::size_t ri = 0; ri < inst.removable.size(); ++ri)
        if (design[ri] == 0.0)
          expected = std::max(
              expected,
              f.per_destination[static_cast<std::size_t>(z) * E +
                                inst.removable[ri]]);
  CHECK(constraint_violation(inst, flows, design) == expected);

  std::vector<double> all_open(inst.removable.size(), 1.0);
  CHECK(constraint_violation(inst, flows, all_open) == 0.0);
}

TEST_CASE("finalize validates structural invariants") {
  auto valid = [] {
    NetworkInstance inst;
    inst.node_count = 2;
    inst.edges = {{0, 1}};
    inst.alpha = {0.0};
    inst.beta = {1.0};
    inst.gamma = {0.0};
    inst.rho = {2.0};
    inst.zones = {1};
    inst.origins = {0};
    DemandTable t;
    t.demand = {1.0};
    t.zone_total = {1.0};
    t.probability = 1.0;
    inst.scenarios = {t};
    return inst;
  };

  CHECK_NOTHROW(valid().finalize());

  auto broken = valid();
  broken.rho = {1.0};
  CHECK_THROWS_AS(broken.finalize(), std::invalid_argument);

  broken = valid();
  broken.scenarios[0].probability = 0.5;
  CHECK_THROWS_AS(broken.finalize(), std::invalid_argument);

  broken = valid();
  broken.scenarios[0].zone_total = {2.0};
  CHECK_THROWS_AS(broken.finalize(), std::invalid_argument);

  broken = valid();
  broken.removable = {3};
  broken.prices = {1.0};
  CHECK_THROWS_AS(broken.finalize(), std::invalid_argument);

  broken = valid();
  broken.beta = {-1.0};
  CHECK_THROWS_AS(broken.finalize(), std::invalid_argument);
}
