#include <cstdlib>
#include <string>

#include "mlslab/simd.hpp"

namespace mlslab::simd {
namespace {

bool cpu_has(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(MLSLAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#ifdef MLSLAB_HAVE_NEON
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa choose() {
  if (const char* env = std::getenv("MLSLAB_SIMD")) {
    std::string s(env);
    if (s == "scalar") return Isa::scalar;
    if (s == "avx2" && cpu_has(Isa::avx2)) return Isa::avx2;
    if (s == "neon" && cpu_has(Isa::neon)) return Isa::neon;
  }
  if (cpu_has(Isa::avx2)) return Isa::avx2;
  if (cpu_has(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

}  // namespace

const Kernels* kernels_for(Isa isa) {
  if (!cpu_has(isa)) return nullptr;
  switch (isa) {
    case Isa::scalar:
      return &detail::scalar_kernels;
#ifdef MLSLAB_HAVE_AVX2
    case Isa::avx2:
      return &detail::avx2_kernels;
#endif
#ifdef MLSLAB_HAVE_NEON
    case Isa::neon:
      return &detail::neon_kernels;
#endif
    default:
      return nullptr;
  }
}

Isa active_isa() {
  static const Isa isa = choose();
  return isa;
}

const Kernels& kernels() {
  static const Kernels* k = kernels_for(active_isa());
  return *k;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

}  // namespace mlslab::simd
