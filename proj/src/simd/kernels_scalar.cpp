#include "mlslab/simd.hpp"

namespace mlslab::simd::detail {
namespace {

void cdot_scalar(const double* ar, const double* ai, const double* br,
                 const double* bi, std::size_t n, double* out_re,
                 double* out_im) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += ar[i] * br[i] - ai[i] * bi[i];
    im += ar[i] * bi[i] + ai[i] * br[i];
  }
  *out_re = re;
  *out_im = im;
}

void caxpy_scalar(std::size_t n, double sr, double si, const double* xr,
                  const double* xi, double* yr, double* yi) {
  for (std::size_t i = 0; i < n; ++i) {
    yr[i] += sr * xr[i] - si * xi[i];
    yi[i] += sr * xi[i] + si * xr[i];
  }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(std::size_t n, double alpha, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const Kernels scalar_kernels{cdot_scalar, caxpy_scalar, dot_scalar, axpy_scalar};

}  // namespace mlslab::simd::detail
