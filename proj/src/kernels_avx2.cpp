// AVX2 variants. Compiled with -mavx2 on x86-64 only; dispatch happens in
// kernels.cpp after a cpuid check. Kept free of FMA so results match the
// scalar reference bit for bit (the build disables fp contraction).
#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "voxmt/kernels.hpp"

namespace voxmt::kernels::avx2 {

static void axpy_impl(float* y, const float* x, float a, std::size_t n) {
  const __m256 av = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 yv = _mm256_loadu_ps(y + i);
    __m256 xv = _mm256_loadu_ps(x + i);
    yv = _mm256_add_ps(yv, _mm256_mul_ps(av, xv));
    _mm256_storeu_ps(y + i, yv);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

static void add_impl(float* y, const float* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 yv = _mm256_add_ps(_mm256_loadu_ps(y + i), _mm256_loadu_ps(x + i));
    _mm256_storeu_ps(y + i, yv);
  }
  for (; i < n; ++i) y[i] += x[i];
}

static void scale_impl(float* y, float a, std::size_t n) {
  const __m256 av = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_mul_ps(_mm256_loadu_ps(y + i), av));
  }
  for (; i < n; ++i) y[i] *= a;
}

static void relu_impl(float* y, std::size_t n) {
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    // max_ps(a, b) = a > b ? a : b, matching the scalar reference exactly.
    _mm256_storeu_ps(y + i, _mm256_max_ps(_mm256_loadu_ps(y + i), zero));
  }
  for (; i < n; ++i) y[i] = y[i] > 0.0f ? y[i] : 0.0f;
}

static void emax_impl(float* y, const float* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 r = _mm256_max_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i));
    _mm256_storeu_ps(y + i, r);
  }
  for (; i < n; ++i) y[i] = x[i] > y[i] ? x[i] : y[i];
}

const Ops ops = {axpy_impl, add_impl, scale_impl, relu_impl, emax_impl, "avx2"};

}  // namespace voxmt::kernels::avx2

#endif
