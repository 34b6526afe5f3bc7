#pragma once

#include <cstddef>

// Float inner-loop kernels used by the convolution and pooling paths.
// A scalar reference implementation always exists; on x86-64 an AVX2
// variant is selected at runtime when the CPU supports it. All variants
// are elementwise (no reductions), so scalar and SIMD results are
// bitwise identical and equivalence-tested as such.
namespace voxmt::kernels {

struct Ops {
  // y[i] += a * x[i]
  void (*axpy)(float* y, const float* x, float a, std::size_t n);
  // y[i] += x[i]
  void (*add)(float* y, const float* x, std::size_t n);
  // y[i] *= a
  void (*scale)(float* y, float a, std::size_t n);
  // y[i] = max(y[i], 0)
  void (*relu)(float* y, std::size_t n);
  // y[i] = max(y[i], x[i])
  void (*emax)(float* y, const float* x, std::size_t n);
  const char* name;
};

namespace scalar {
extern const Ops ops;
}

#if defined(__x86_64__) || defined(_M_X64)
#define VOXMT_HAVE_AVX2_BUILD 1
namespace avx2 {
extern const Ops ops;
}
#endif

// Active implementation: picked once from CPU features, overridable via
// the VOXMT_KERNELS environment variable ("scalar" or "avx2").
const Ops& active();

inline void axpy(float* y, const float* x, float a, std::size_t n) { active().axpy(y, x, a, n); }
inline void add(float* y, const float* x, std::size_t n) { active().add(y, x, n); }
inline void scale(float* y, float a, std::size_t n) { active().scale(y, a, n); }
inline void relu(float* y, std::size_t n) { active().relu(y, n); }
inline void emax(float* y, const float* x, std::size_t n) { active().emax(y, x, n); }

}  // namespace voxmt::kernels
