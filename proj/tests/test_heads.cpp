#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "test_util.hpp"
#include "voxmt/config.hpp"
#include "voxmt/errors.hpp"
#include "voxmt/heads.hpp"
#include "voxmt/pipeline.hpp"

using namespace voxmt;

namespace {

BevGeometry toy_geom() {
  BevGeometry g;
  g.x_min = -16.0;
  g.y_min = -16.0;
  g.cell_x = 1.0;
  g.cell_y = 1.0;
  g.height = 32;
  g.width = 32;
  return g;
}

Box3D make_box(double cx, double cy, double yaw, int32_t cls) {
  Box3D b;
  b.cx = cx;
  b.cy = cy;
  b.cz = 0.9;
  b.l = 4.0;
  b.w = 1.8;
  b.h = 1.6;
  b.yaw = yaw;
  b.class_id = cls;
  return b;
}

}  // namespace

TEST_CASE("render_targets splats a unit peak at the center cell") {
  const BevGeometry geom = toy_geom();
  const DetTargets t = render_targets({make_box(0.5, 0.5, 0.3, 0)}, geom, {0});
  REQUIRE(t.reg_targets.size() == 1);
  const RegTarget& rt = t.reg_targets[0];
  CHECK(rt.row == 16);
  CHECK(rt.col == 16);
  CHECK(t.heatmap.at(0, 16, 16) == 1.0f);
  CHECK(rt.values[0] == doctest::Approx(0.5));
  CHECK(rt.values[1] == doctest::Approx(0.5));
  CHECK(rt.values[3] == doctest::Approx(std::log(4.0)));
  CHECK(rt.values[6] == doctest::Approx(std::sin(0.3)));
  CHECK(rt.iou_target == 1.0);
  // Heatmap decays monotonically away from the peak along a row.
  CHECK(t.heatmap.at(0, 16, 17) < 1.0f);
  CHECK(t.heatmap.at(0, 16, 18) <= t.heatmap.at(0, 16, 17));
}

TEST_CASE("out-of-range boxes are counted, stuff-class boxes rejected") {
  const BevGeometry geom = toy_geom();
  const DetTargets t = render_targets({make_box(100.0, 0.0, 0.0, 0)}, geom, {0});
  CHECK(t.skipped_out_of_range == 1);
  CHECK(t.reg_targets.empty());

  CHECK_THROWS_AS(render_targets({make_box(0.0, 0.0, 0.0, 1)}, geom, {0, -1}), ConfigError);
}

TEST_CASE("render then decode recovers the box") {
  const BevGeometry geom = toy_geom();
  std::mt19937_64 g(44);
  for (int trial = 0; trial < 25; ++trial) {
    const Box3D box = make_box(testutil::urand(g) * 24.0 - 12.0, testutil::urand(g) * 24.0 - 12.0,
                               testutil::urand(g) * 6.0 - 3.0, 0);
    const DetTargets t = render_targets({box}, geom, {0});
    REQUIRE(t.reg_targets.size() == 1);
    const RegTarget& rt = t.reg_targets[0];

    DetOutput det;
    det.heatmap = t.heatmap;
    det.reg = make_bev(8, geom.height, geom.width);
    det.iou = make_bev(1, geom.height, geom.width);
    for (int32_t ch = 0; ch < 8; ++ch) {
      det.reg.at(ch, rt.row, rt.col) = static_cast<float>(rt.values[ch]);
    }
    det.iou.at(0, rt.row, rt.col) = 1.0f;

    const std::vector<Box3D> out = decode_boxes(det, geom, {0}, 10, 0.5);
    REQUIRE(out.size() == 1);
    CHECK(std::abs(out[0].cx - box.cx) <= geom.cell_x);
    CHECK(std::abs(out[0].cy - box.cy) <= geom.cell_y);
    const double dyaw = std::remainder(out[0].yaw - box.yaw, 2.0 * 3.14159265358979323846);
    CHECK(std::abs(dyaw) < 1e-6);
    CHECK(out[0].class_id == 0);
    CHECK(out[0].score == doctest::Approx(1.0));
  }
}

TEST_CASE("plateaus break toward the lowest (row, col)") {
  const BevGeometry geom = toy_geom();
  DetOutput det;
  det.heatmap = make_bev(1, geom.height, geom.width);
  det.reg = make_bev(8, geom.height, geom.width);
  det.iou = make_bev(1, geom.height, geom.width);
  det.heatmap.at(0, 5, 5) = 0.8f;
  det.heatmap.at(0, 5, 6) = 0.8f;
  det.heatmap.at(0, 6, 5) = 0.8f;
  for (float& v : det.iou.data) v = 1.0f;
  const std::vector<Box3D> out = decode_boxes(det, geom, {0}, 10, 0.1);
  REQUIRE(out.size() == 1);
  CHECK(out[0].cx == doctest::Approx(geom.x_min + 5.0));
  CHECK(out[0].cy == doctest::Approx(geom.y_min + 5.0));
}

TEST_CASE("rectified score is sqrt(hm * iou) and gates on the threshold") {
  const BevGeometry geom = toy_geom();
  DetOutput det;
  det.heatmap = make_bev(1, geom.height, geom.width);
  det.reg = make_bev(8, geom.height, geom.width);
  det.iou = make_bev(1, geom.height, geom.width);
  det.heatmap.at(0, 3, 3) = 0.64f;
  det.iou.at(0, 3, 3) = 0.25f;
  const std::vector<Box3D> out = decode_boxes(det, geom, {0}, 10, 0.1);
  REQUIRE(out.size() == 1);
  CHECK(out[0].score == doctest::Approx(0.4));
  CHECK(decode_boxes(det, geom, {0}, 10, 0.4).empty());  // strict >
}

TEST_CASE("zero det-head weights give hm = 0.5 everywhere and no decode peaks above 0.5") {
  const PipelineConfig cfg = profile_config("toy");
  WeightStore ws = init_weights(cfg, 9);
  const int32_t bev_ch = cfg.gcp.level1_width + cfg.gcp.level2_width;
  ws.put("head.det.hm.weight",
         {1, 1, static_cast<uint32_t>(bev_ch), static_cast<uint32_t>(cfg.num_thing())},
         std::vector<float>(static_cast<std::size_t>(bev_ch) * cfg.num_thing(), 0.0f));
  ws.put("head.det.hm.bias", {static_cast<uint32_t>(cfg.num_thing())},
         std::vector<float>(cfg.num_thing(), 0.0f));
  DenseBEV bev = make_bev(bev_ch, 4, 4);
  for (float& v : bev.data) v = 0.3f;
  const DetOutput det = det_head(bev, ws, cfg.num_thing());
  for (float v : det.heatmap.data) CHECK(v == 0.5f);
}
