#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstring>
#include <random>

#include "doctest.h"
#include "test_util.hpp"
#include "voxmt/config.hpp"
#include "voxmt/errors.hpp"
#include "voxmt/gcp.hpp"
#include "voxmt/pipeline.hpp"

using namespace voxmt;

namespace {

// Identity projection: (C'*D)x(C'*D) unit matrix, so bev_to_sparse undoes the
// z-major channel packing of sparse_to_bev exactly.
std::vector<float> identity_projection(int32_t cp, int32_t d) {
  const std::size_t n = static_cast<std::size_t>(cp) * d;
  std::vector<float> w(n * n, 0.0f);
  for (std::size_t i = 0; i < n; ++i) w[i * n + i] = 1.0f;
  return w;
}

}  // namespace

TEST_CASE("sparse_to_bev packs height slices z-major") {
  SparseTensor t;
  t.coords = {{1, 2, 0}, {1, 2, 3}};
  t.channels = 2;
  t.grid_dims = {4, 4, 4};
  t.features = {10.0f, 11.0f, 20.0f, 21.0f};
  const DenseBEV bev = sparse_to_bev(t);
  CHECK(bev.channels == 8);
  CHECK(bev.height == 4);
  CHECK(bev.width == 4);
  CHECK(bev.at(0 * 2 + 0, 2, 1) == 10.0f);
  CHECK(bev.at(0 * 2 + 1, 2, 1) == 11.0f);
  CHECK(bev.at(3 * 2 + 0, 2, 1) == 20.0f);
  CHECK(bev.at(3 * 2 + 1, 2, 1) == 21.0f);
  CHECK(bev.at(1 * 2 + 0, 2, 1) == 0.0f);
}

TEST_CASE("identity projection round-trips bitwise") {
  std::mt19937_64 g(31);
  for (int trial = 0; trial < 20; ++trial) {
    const std::array<int32_t, 3> dims{static_cast<int32_t>(2 + g() % 8),
                                      static_cast<int32_t>(2 + g() % 8),
                                      static_cast<int32_t>(1 + g() % 5)};
    const int32_t cp = static_cast<int32_t>(1 + g() % 6);
    const SparseTensor x = testutil::random_sparse(g, dims, cp, 1 + g() % 30);
    const DenseBEV bev = sparse_to_bev(x);
    const SparseTensor back =
        bev_to_sparse(bev, x, identity_projection(cp, dims[2]), {}, cp);
    REQUIRE(back.coords == x.coords);
    REQUIRE(back.features.size() == x.features.size());
    CHECK(std::memcmp(back.features.data(), x.features.data(),
                      x.features.size() * sizeof(float)) == 0);
  }
}

TEST_CASE("waymo profile BEV plane is 188x188x1280") {
  const PipelineConfig cfg = profile_config("waymo");
  const auto dims = cfg.voxel.grid_dims();
  CHECK(dims == std::array<int32_t, 3>{1504, 1504, 40});
  SparseTensor bottom;
  bottom.channels = cfg.unet.encoder_widths[3];
  bottom.grid_dims = {dims[0] / 8, dims[1] / 8, dims[2] / 8};
  bottom.stride = 8;
  const DenseBEV bev = sparse_to_bev(bottom);
  CHECK(bev.height == 188);
  CHECK(bev.width == 188);
  CHECK(bev.channels == 1280);
}

TEST_CASE("bev extractor merges two scales at full resolution") {
  const PipelineConfig cfg = profile_config("toy");
  const WeightStore ws = init_weights(cfg, 5);
  std::mt19937_64 g(32);
  const auto dims = cfg.voxel.grid_dims();
  const SparseTensor bottom = testutil::random_sparse(
      g, {dims[0] / 8, dims[1] / 8, dims[2] / 8}, cfg.unet.encoder_widths[3], 6);
  const DenseBEV bev = sparse_to_bev(bottom);
  const DenseBEV f = bev_extractor(bev, ws, cfg.gcp);
  CHECK(f.height == bev.height);
  CHECK(f.width == bev.width);
  CHECK(f.channels == cfg.gcp.level1_width + cfg.gcp.level2_width);
}

TEST_CASE("bev_to_sparse validates shapes") {
  std::mt19937_64 g(33);
  const SparseTensor x = testutil::random_sparse(g, {4, 4, 2}, 2, 5);
  DenseBEV bev = sparse_to_bev(x);
  CHECK_THROWS_AS(bev_to_sparse(bev, x, std::vector<float>(3, 0.0f), {}, 2), ConfigError);
  bev.height = 3;
  CHECK_THROWS_AS(bev_to_sparse(bev, x, identity_projection(2, 2), {}, 2), ConfigError);
}
