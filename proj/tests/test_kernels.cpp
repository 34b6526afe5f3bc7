#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "voxmt/kernels.hpp"

using namespace voxmt;

namespace {

std::vector<float> random_vec(std::mt19937_64& g, std::size_t n) {
  std::vector<float> v(n);
  for (float& x : v) x = testutil::ufloat(g);
  return v;
}

bool bitwise_equal(const std::vector<float>& a, const std::vector<float>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

}  // namespace

TEST_CASE("scalar kernels compute the reference semantics") {
  std::vector<float> y{1.0f, -2.0f, 3.0f};
  const std::vector<float> x{0.5f, 0.5f, -1.0f};
  kernels::scalar::ops.axpy(y.data(), x.data(), 2.0f, y.size());
  CHECK(y == std::vector<float>{2.0f, -1.0f, 1.0f});
  kernels::scalar::ops.add(y.data(), x.data(), y.size());
  CHECK(y == std::vector<float>{2.5f, -0.5f, 0.0f});
  kernels::scalar::ops.scale(y.data(), -2.0f, y.size());
  CHECK(y == std::vector<float>{-5.0f, 1.0f, -0.0f});
  kernels::scalar::ops.relu(y.data(), y.size());
  CHECK(y[0] == 0.0f);
  CHECK(y[1] == 1.0f);
  kernels::scalar::ops.emax(y.data(), x.data(), y.size());
  CHECK(y == std::vector<float>{0.5f, 1.0f, 0.0f});
}

#if defined(VOXMT_HAVE_AVX2_BUILD)
TEST_CASE("avx2 kernels are bitwise equal to scalar, including tails") {
  if (!__builtin_cpu_supports("avx2")) return;
  std::mt19937_64 g(123);
  for (std::size_t n : {0ul, 1ul, 3ul, 7ul, 8ul, 9ul, 15ul, 16ul, 31ul, 100ul, 1000ul}) {
    const std::vector<float> x = random_vec(g, n);
    const std::vector<float> y = random_vec(g, n);
    const float a = testutil::ufloat(g);

    auto y0 = y, y1 = y;
    kernels::scalar::ops.axpy(y0.data(), x.data(), a, n);
    kernels::avx2::ops.axpy(y1.data(), x.data(), a, n);
    CHECK(bitwise_equal(y0, y1));

    y0 = y;
    y1 = y;
    kernels::scalar::ops.add(y0.data(), x.data(), n);
    kernels::avx2::ops.add(y1.data(), x.data(), n);
    CHECK(bitwise_equal(y0, y1));

    y0 = y;
    y1 = y;
    kernels::scalar::ops.scale(y0.data(), a, n);
    kernels::avx2::ops.scale(y1.data(), a, n);
    CHECK(bitwise_equal(y0, y1));

    y0 = y;
    y1 = y;
    kernels::scalar::ops.relu(y0.data(), n);
    kernels::avx2::ops.relu(y1.data(), n);
    CHECK(bitwise_equal(y0, y1));

    y0 = y;
    y1 = y;
    kernels::scalar::ops.emax(y0.data(), x.data(), n);
    kernels::avx2::ops.emax(y1.data(), x.data(), n);
    CHECK(bitwise_equal(y0, y1));
  }
}
#endif

TEST_CASE("active dispatch names a known variant") {
  const std::string name = kernels::active().name;
  CHECK((name == "scalar" || name == "avx2"));
}
