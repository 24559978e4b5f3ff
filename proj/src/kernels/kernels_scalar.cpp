#include <cstddef>

#include "netdesign/kernels.hpp"
#include "pow_util.hpp"

namespace netdesign::kernels {
namespace {

using detail::pow_fast;

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scal_scalar(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void add_scalar(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

double edge_cost_sum_scalar(const double* x, const double* beta,
                            const double* gamma, const double* rho,
                            std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += beta[i] * x[i] + gamma[i] * pow_fast(x[i], rho[i]);
  return acc;
}

void edge_cost_grad_scalar(const double* x, const double* beta,
                           const double* gamma, const double* rho, double* out,
                           std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = beta[i] + gamma[i] * rho[i] * pow_fast(x[i], rho[i] - 1.0);
}

}  // namespace

const Backend& scalar() {
  static const Backend backend{
      "scalar",          dot_scalar,  sum_scalar,
      axpy_scalar,       scal_scalar, add_scalar,
      edge_cost_sum_scalar, edge_cost_grad_scalar,
  };
  return backend;
}

}  // namespace netdesign::kernels
