#pragma once

#include <cmath>

namespace netdesign::kernels::detail {

// x^p with a multiply-chain fast path for small integral p. Every backend
// routes through the same chain so integral-exponent results agree exactly
// across backends; fractional exponents go to std::pow.
inline double pow_fast(double x, double p) {
  double ip;
  if (p >= 0.0 && p <= 16.0 && std::modf(p, &ip) == 0.0) {
    int k = static_cast<int>(ip);
    double r = 1.0, base = x;
    while (k > 0) {
      if (k & 1) r *= base;
      base *= base;
      k >>= 1;
    }
    return r;
  }
  return std::pow(x, p);
}

/// True when p is an integer in [0, 16]; stores it in *k.
inline bool small_integral(double p, int* k) {
  double ip;
  if (p < 0.0 || p > 16.0 || std::modf(p, &ip) != 0.0) return false;
  *k = static_cast<int>(ip);
  return true;
}

}  // namespace netdesign::kernels::detail
