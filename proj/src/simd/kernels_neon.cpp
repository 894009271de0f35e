#include <arm_neon.h>

#include "mlslab/simd.hpp"

namespace mlslab::simd::detail {
namespace {

void cdot_neon(const double* ar, const double* ai, const double* br,
               const double* bi, std::size_t n, double* out_re,
               double* out_im) {
  float64x2_t re = vdupq_n_f64(0.0), re2 = vdupq_n_f64(0.0);
  float64x2_t im = vdupq_n_f64(0.0), im2 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t xr = vld1q_f64(ar + i), xi = vld1q_f64(ai + i);
    float64x2_t yr = vld1q_f64(br + i), yi = vld1q_f64(bi + i);
    re = vfmaq_f64(re, xr, yr);
    re2 = vfmsq_f64(re2, xi, yi);
    im = vfmaq_f64(im, xr, yi);
    im2 = vfmaq_f64(im2, xi, yr);
  }
  double sre = vaddvq_f64(vaddq_f64(re, re2));
  double sim = vaddvq_f64(vaddq_f64(im, im2));
  for (; i < n; ++i) {
    sre += ar[i] * br[i] - ai[i] * bi[i];
    sim += ar[i] * bi[i] + ai[i] * br[i];
  }
  *out_re = sre;
  *out_im = sim;
}

void caxpy_neon(std::size_t n, double sr, double si, const double* xr,
                const double* xi, double* yr, double* yi) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t a = vld1q_f64(xr + i), b = vld1q_f64(xi + i);
    float64x2_t r = vld1q_f64(yr + i), m = vld1q_f64(yi + i);
    r = vfmaq_n_f64(r, a, sr);
    r = vfmsq_n_f64(r, b, si);
    m = vfmaq_n_f64(m, b, sr);
    m = vfmaq_n_f64(m, a, si);
    vst1q_f64(yr + i, r);
    vst1q_f64(yi + i, m);
  }
  for (; i < n; ++i) {
    yr[i] += sr * xr[i] - si * xi[i];
    yi[i] += sr * xi[i] + si * xr[i];
  }
}

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t s = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) s = vfmaq_f64(s, vld1q_f64(a + i), vld1q_f64(b + i));
  double r = vaddvq_f64(s);
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

void axpy_neon(std::size_t n, double alpha, const double* x, double* y) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vfmaq_n_f64(vld1q_f64(y + i), vld1q_f64(x + i), alpha));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const Kernels neon_kernels{cdot_neon, caxpy_neon, dot_neon, axpy_neon};

}  // namespace mlslab::simd::detail
