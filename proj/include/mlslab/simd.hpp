#pragma once
// Runtime-dispatched numeric kernels. Every kernel has a scalar reference
// version; vector variants must agree with it to rounding.

#include <cstddef>
#include <string_view>

namespace mlslab::simd {

enum class Isa { scalar, avx2, neon };

struct Kernels {
  // sum_i a_i * b_i over complex arrays in split (re, im) layout
  void (*cdot)(const double* ar, const double* ai, const double* br,
               const double* bi, std::size_t n, double* out_re, double* out_im);
  // y += s * x, complex split layout
  void (*caxpy)(std::size_t n, double sr, double si, const double* xr,
                const double* xi, double* yr, double* yi);
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
};

// Kernels for the active ISA. The choice is made once per process:
// MLSLAB_SIMD=scalar|avx2|neon forces a variant when the CPU supports it.
const Kernels& kernels();
Isa active_isa();
std::string_view isa_name(Isa isa);

// Direct access for equivalence tests; returns nullptr when unavailable.
const Kernels* kernels_for(Isa isa);

namespace detail {
// Only the variants compiled for the target exist.
extern const Kernels scalar_kernels;
extern const Kernels avx2_kernels;
extern const Kernels neon_kernels;
}  // namespace detail

}  // namespace mlslab::simd
