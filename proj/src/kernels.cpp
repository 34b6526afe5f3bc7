#include "voxmt/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace voxmt::kernels {

namespace scalar {

static void axpy_impl(float* y, const float* x, float a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

static void add_impl(float* y, const float* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

static void scale_impl(float* y, float a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= a;
}

static void relu_impl(float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] > 0.0f ? y[i] : 0.0f;
}

static void emax_impl(float* y, const float* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > y[i] ? x[i] : y[i];
}

const Ops ops = {axpy_impl, add_impl, scale_impl, relu_impl, emax_impl, "scalar"};

}  // namespace scalar

static const Ops& select() {
  const char* force = std::getenv("VOXMT_KERNELS");
  if (force != nullptr) {
    if (std::strcmp(force, "scalar") == 0) return scalar::ops;
#ifdef VOXMT_HAVE_AVX2_BUILD
    if (std::strcmp(force, "avx2") == 0) return avx2::ops;
#endif
  }
#ifdef VOXMT_HAVE_AVX2_BUILD
  if (__builtin_cpu_supports("avx2")) return avx2::ops;
#endif
  return scalar::ops;
}

const Ops& active() {
  static const Ops& chosen = select();
  return chosen;
}

}  // namespace voxmt::kernels
