#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "doctest.h"
#include "netdesign/kernels.hpp"
#include "netdesign/rng.hpp"

namespace k = netdesign::kernels;
using netdesign::SplitMix64;

namespace {

std::vector<double> random_vec(SplitMix64& rng, std::size_t n, double lo,
                               double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

// Relative closeness with a magnitude-aware scale, for sums whose evaluation
// order differs between backends.
bool close(double a, double b, double tol = 1e-12) {
  return std::abs(a - b) <= tol * (1.0 + std::abs(a) + std::abs(b));
}

const std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 13, 31, 64, 257, 1000};

// Exponent patterns seen in practice: uniform integral (BPR power + 1),
// mixed integral, fractional, and the rho == 1 boundary.
std::vector<double> rho_pattern(SplitMix64& rng, std::size_t n, int variant) {
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    switch (variant) {
      case 0: r[i] = 5.0; break;
      case 1: r[i] = (i % 3 == 0) ? 2.0 : 5.0; break;
      case 2: r[i] = 1.0 + 1.5 * rng.uniform(); break;
      default: r[i] = (i % 2 == 0) ? 1.0 : 2.5; break;
    }
  }
  return r;
}

}  // namespace

TEST_CASE("scalar kernels match plain loops") {
  SplitMix64 rng(42);
  const k::Backend& b = k::scalar();
  for (std::size_t n : kSizes) {
    auto x = random_vec(rng, n, 0.0, 50.0);
    auto y = random_vec(rng, n, 0.0, 10.0);

    double dot_ref = 0.0, sum_ref = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dot_ref += x[i] * y[i];
      sum_ref += x[i];
    }
    CHECK(b.dot(x.data(), y.data(), n) == doctest::Approx(dot_ref).epsilon(1e-14));
    CHECK(b.sum(x.data(), n) == doctest::Approx(sum_ref).epsilon(1e-14));

    auto y2 = y;
    b.axpy(-0.75, x.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(y2[i] == doctest::Approx(y[i] - 0.75 * x[i]).epsilon(1e-14));

    auto x2 = x;
    b.scal(3.0, x2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(x2[i] == 3.0 * x[i]);

    auto y3 = y;
    b.add(x.data(), y3.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y3[i] == x[i] + y[i]);
  }
}

TEST_CASE("scalar edge-cost kernels match std::pow evaluation") {
  SplitMix64 rng(7);
  const k::Backend& b = k::scalar();
  for (std::size_t n : {std::size_t{1}, std::size_t{9}, std::size_t{64}}) {
    for (int variant = 0; variant < 4; ++variant) {
      auto x = random_vec(rng, n, 0.0, 40.0);
      auto beta = random_vec(rng, n, 0.1, 10.0);
      auto gamma = random_vec(rng, n, 0.0, 2.0);
      auto rho = rho_pattern(rng, n, variant);
      x[0] = 0.0;  // boundary: zero flow must be handled for every rho

      double ref = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        ref += beta[i] * x[i] + gamma[i] * std::pow(x[i], rho[i]);
      CHECK(close(b.edge_cost_sum(x.data(), beta.data(), gamma.data(),
                                  rho.data(), n),
                  ref));

      std::vector<double> grad(n);
      b.edge_cost_grad(x.data(), beta.data(), gamma.data(), rho.data(),
                       grad.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        double gref =
            beta[i] + gamma[i] * rho[i] * std::pow(x[i], rho[i] - 1.0);
        CHECK(close(grad[i], gref));
      }
    }
  }
}

TEST_CASE("avx2 backend agrees with scalar backend") {
  if (!k::select("avx2")) {
    MESSAGE("avx2 backend unavailable on this machine; skipping");
    return;
  }
  const k::Backend& va = k::active();
  const k::Backend& sc = k::scalar();
  CHECK(std::string(va.name) == "avx2");

  SplitMix64 rng(2024);
  for (std::size_t n : kSizes) {
    auto x = random_vec(rng, n, 0.0, 50.0);
    auto y = random_vec(rng, n, 0.0, 10.0);

    CHECK(close(va.dot(x.data(), y.data(), n), sc.dot(x.data(), y.data(), n)));
    CHECK(close(va.sum(x.data(), n), sc.sum(x.data(), n)));

    auto ya = y, ys = y;
    va.axpy(1.25, x.data(), ya.data(), n);
    sc.axpy(1.25, x.data(), ys.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(close(ya[i], ys[i]));

    auto xa = x, xs = x;
    va.scal(0.5, xa.data(), n);
    sc.scal(0.5, xs.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(xa[i] == xs[i]);

    auto za = y, zs = y;
    va.add(x.data(), za.data(), n);
    sc.add(x.data(), zs.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(za[i] == zs[i]);

    for (int variant = 0; variant < 4; ++variant) {
      auto beta = random_vec(rng, n, 0.1, 10.0);
      auto gamma = random_vec(rng, n, 0.0, 2.0);
      auto rho = rho_pattern(rng, n, variant);
      if (n > 0) x[n / 2] = 0.0;

      CHECK(close(va.edge_cost_sum(x.data(), beta.data(), gamma.data(),
                                   rho.data(), n),
                  sc.edge_cost_sum(x.data(), beta.data(), gamma.data(),
                                   rho.data(), n)));

      std::vector<double> ga(n), gs(n);
      va.edge_cost_grad(x.data(), beta.data(), gamma.data(), rho.data(),
                        ga.data(), n);
      sc.edge_cost_grad(x.data(), beta.data(), gamma.data(), rho.data(),
                        gs.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(close(ga[i], gs[i]));
    }
  }
  CHECK(k::select("auto"));
}

TEST_CASE("backend selection") {
  CHECK(k::select("scalar"));
  CHECK(std::string(k::active().name) == "scalar");
  CHECK_FALSE(k::select("no-such-backend"));
  CHECK(std::string(k::active().name) == "scalar");  // unchanged on failure
  CHECK(k::select("auto"));
  // Wrappers route through the active backend.
  double a[3] = {1.0, 2.0, 3.0};
  double b[3] = {4.0, 5.0, 6.0};
  CHECK(k::dot(a, b, 3) == doctest::Approx(32.0));
  CHECK(k::sum(a, 3) == doctest::Approx(6.0));
}
