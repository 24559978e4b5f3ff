#pragma once

#include <cstddef>
#include <string_view>

namespace netdesign::kernels {

// Dense inner loops of the solver: BLAS-1 style vector ops plus the
// polynomial edge-cost evaluations. A scalar reference implementation is
// always available; an AVX2 variant is selected at runtime when the CPU
// supports it. All arrays are unaliased unless a kernel says otherwise.
//
// Preconditions shared by the edge-cost kernels: x >= 0 elementwise,
// rho >= 1 elementwise (flows and BPR exponents).
struct Backend {
  const char* name;

  // sum_i a[i]*b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i a[i]
  double (*sum)(const double* a, std::size_t n);
  // y[i] += a*x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // x[i] *= a
  void (*scal)(double a, double* x, std::size_t n);
  // y[i] += x[i]
  void (*add)(const double* x, double* y, std::size_t n);
  // sum_i beta[i]*x[i] + gamma[i]*x[i]^rho[i]  (integrated congestion cost,
  // constant terms excluded)
  double (*edge_cost_sum)(const double* x, const double* beta,
                          const double* gamma, const double* rho,
                          std::size_t n);
  // out[i] = beta[i] + gamma[i]*rho[i]*x[i]^(rho[i]-1)  (marginal edge cost)
  void (*edge_cost_grad)(const double* x, const double* beta,
                         const double* gamma, const double* rho, double* out,
                         std::size_t n);
};

/// Scalar reference backend.
const Backend& scalar();

/// Currently selected backend (AVX2 when available, else scalar). The
/// NETDESIGN_KERNELS environment variable ("scalar", "avx2", "auto")
/// overrides the automatic pick.
const Backend& active();

/// Force a backend by name; returns false if it is not available on this
/// machine. Intended for tests and benchmarking.
bool select(std::string_view name);

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline double sum(const double* a, std::size_t n) { return active().sum(a, n); }
inline void axpy(double a, const double* x, double* y, std::size_t n) {
  active().axpy(a, x, y, n);
}
inline void scal(double a, double* x, std::size_t n) { active().scal(a, x, n); }
inline void add(const double* x, double* y, std::size_t n) {
  active().add(x, y, n);
}
inline double edge_cost_sum(const double* x, const double* beta,
                            const double* gamma, const double* rho,
                            std::size_t n) {
  return active().edge_cost_sum(x, beta, gamma, rho, n);
}
inline void edge_cost_grad(const double* x, const double* beta,
                           const double* gamma, const double* rho, double* out,
                           std::size_t n) {
  active().edge_cost_grad(x, beta, gamma, rho, out, n);
}

}  // namespace netdesign::kernels
