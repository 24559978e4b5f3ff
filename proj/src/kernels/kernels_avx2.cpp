#include "netdesign/kernels.hpp"

#ifdef NETDESIGN_HAVE_AVX2

#include <immintrin.h>

#include <cstddef>

#include "pow_util.hpp"

namespace netdesign::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return hsum(acc) + tail;
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i];
  return hsum(acc) + tail;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv =
        _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scal_avx2(double a, double* x, std::size_t n) {
  __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

void add_avx2(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(
        y + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += x[i];
}

// x^k for a lane-uniform integer exponent, same multiply chain as the scalar
// fast path so lanes match the scalar backend exactly.
inline __m256d pow_int(__m256d x, int k) {
  __m256d r = _mm256_set1_pd(1.0);
  __m256d base = x;
  while (k > 0) {
    if (k & 1) r = _mm256_mul_pd(r, base);
    base = _mm256_mul_pd(base, base);
    k >>= 1;
  }
  return r;
}

/// True when rho[0..3] are identical and a small integer; stores it in *k.
inline bool uniform_int_rho(const double* rho, int* k) {
  double r0 = rho[0];
  if (rho[1] != r0 || rho[2] != r0 || rho[3] != r0) return false;
  return detail::small_integral(r0, k);
}

double edge_cost_sum_avx2(const double* x, const double* beta,
                          const double* gamma, const double* rho,
                          std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xv = _mm256_loadu_pd(x + i);
    __m256d pv;
    int k;
    if (uniform_int_rho(rho + i, &k)) {
      pv = pow_int(xv, k);
    } else {
      alignas(32) double tmp[4];
      for (int l = 0; l < 4; ++l)
        tmp[l] = detail::pow_fast(x[i + l], rho[i + l]);
      pv = _mm256_load_pd(tmp);
    }
    __m256d term = _mm256_mul_pd(_mm256_loadu_pd(beta + i), xv);
    acc = _mm256_add_pd(acc, _mm256_fmadd_pd(_mm256_loadu_pd(gamma + i), pv, term));
  }
  double tail = 0.0;
  for (; i < n; ++i)
    tail += beta[i] * x[i] + gamma[i] * detail::pow_fast(x[i], rho[i]);
  return hsum(acc) + tail;
}

void edge_cost_grad_avx2(const double* x, const double* beta,
                         const double* gamma, const double* rho, double* out,
                         std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xv = _mm256_loadu_pd(x + i);
    __m256d pv;
    int k;
    if (uniform_int_rho(rho + i, &k) && k >= 1) {
      pv = pow_int(xv, k - 1);
    } else {
      alignas(32) double tmp[4];
      for (int l = 0; l < 4; ++l)
        tmp[l] = detail::pow_fast(x[i + l], rho[i + l] - 1.0);
      pv = _mm256_load_pd(tmp);
    }
    __m256d gr = _mm256_mul_pd(_mm256_loadu_pd(gamma + i), _mm256_loadu_pd(rho + i));
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(gr, pv, _mm256_loadu_pd(beta + i)));
  }
  for (; i < n; ++i)
    out[i] = beta[i] + gamma[i] * rho[i] * detail::pow_fast(x[i], rho[i] - 1.0);
}

}  // namespace

const Backend& avx2() {
  static const Backend backend{
      "avx2",          dot_avx2,  sum_avx2,
      axpy_avx2,       scal_avx2, add_avx2,
      edge_cost_sum_avx2, edge_cost_grad_avx2,
  };
  return backend;
}

}  // namespace netdesign::kernels

#endif  // NETDESIGN_HAVE_AVX2
