#include <immintrin.h>

#include "mlslab/simd.hpp"

namespace mlslab::simd::detail {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void cdot_avx2(const double* ar, const double* ai, const double* br,
               const double* bi, std::size_t n, double* out_re,
               double* out_im) {
  __m256d re = _mm256_setzero_pd(), im = _mm256_setzero_pd();
  __m256d re2 = _mm256_setzero_pd(), im2 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xr = _mm256_loadu_pd(ar + i), xi = _mm256_loadu_pd(ai + i);
    __m256d yr = _mm256_loadu_pd(br + i), yi = _mm256_loadu_pd(bi + i);
    re = _mm256_fmadd_pd(xr, yr, re);
    re2 = _mm256_fnmadd_pd(xi, yi, re2);
    im = _mm256_fmadd_pd(xr, yi, im);
    im2 = _mm256_fmadd_pd(xi, yr, im2);
  }
  double sre = hsum(_mm256_add_pd(re, re2));
  double sim = hsum(_mm256_add_pd(im, im2));
  for (; i < n; ++i) {
    sre += ar[i] * br[i] - ai[i] * bi[i];
    sim += ar[i] * bi[i] + ai[i] * br[i];
  }
  *out_re = sre;
  *out_im = sim;
}

void caxpy_avx2(std::size_t n, double sr, double si, const double* xr,
                const double* xi, double* yr, double* yi) {
  const __m256d vsr = _mm256_set1_pd(sr), vsi = _mm256_set1_pd(si);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d a = _mm256_loadu_pd(xr + i), b = _mm256_loadu_pd(xi + i);
    __m256d r = _mm256_loadu_pd(yr + i), m = _mm256_loadu_pd(yi + i);
    r = _mm256_fmadd_pd(vsr, a, r);
    r = _mm256_fnmadd_pd(vsi, b, r);
    m = _mm256_fmadd_pd(vsr, b, m);
    m = _mm256_fmadd_pd(vsi, a, m);
    _mm256_storeu_pd(yr + i, r);
    _mm256_storeu_pd(yi + i, m);
  }
  for (; i < n; ++i) {
    yr[i] += sr * xr[i] - si * xi[i];
    yi[i] += sr * xi[i] + si * xr[i];
  }
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const Kernels avx2_kernels{cdot_avx2, caxpy_avx2, dot_avx2, axpy_avx2};

}  // namespace mlslab::simd::detail
