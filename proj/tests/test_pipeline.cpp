#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "doctest.h"
#include "test_util.hpp"
#include "voxmt/config.hpp"
#include "voxmt/errors.hpp"
#include "voxmt/pipeline.hpp"

using namespace voxmt;

TEST_CASE("synthetic scenes are reproducible and label-complete") {
  const PipelineConfig cfg = profile_config("toy");
  const SynthScene a = synth_scene(11, 3, 2000, cfg);
  const SynthScene b = synth_scene(11, 3, 2000, cfg);
  REQUIRE(a.cloud.size() == 2000);
  CHECK(a.boxes.size() == 3);
  CHECK(a.labels.semantic.size() == a.cloud.size());
  CHECK(a.labels.instance.size() == a.cloud.size());
  CHECK(std::memcmp(a.cloud.points.data(), b.cloud.points.data(),
                    a.cloud.size() * sizeof(Point)) == 0);
  CHECK(a.labels.semantic == b.labels.semantic);

  const SynthScene c = synth_scene(12, 3, 2000, cfg);
  CHECK(std::memcmp(a.cloud.points.data(), c.cloud.points.data(),
                    a.cloud.size() * sizeof(Point)) != 0);

  // Object points carry their box's thing class and a 1-based instance id.
  for (std::size_t i = 0; i < a.cloud.size(); ++i) {
    const int32_t inst = a.labels.instance[i];
    if (inst > 0) {
      REQUIRE(inst <= static_cast<int32_t>(a.boxes.size()));
      CHECK(a.labels.semantic[i] == a.boxes[inst - 1].class_id);
    }
  }
}

TEST_CASE("init_weights is seeded and covers every layer the pipeline reads") {
  const PipelineConfig cfg = profile_config("toy");
  const WeightStore a = init_weights(cfg, 5);
  const WeightStore b = init_weights(cfg, 5);
  CHECK(a.size() == b.size());
  CHECK(a.get("enc.s2.conv0.weight").data == b.get("enc.s2.conv0.weight").data);
  const WeightStore c = init_weights(cfg, 6);
  CHECK(a.get("enc.s2.conv0.weight").data != c.get("enc.s2.conv0.weight").data);
  for (const char* name : {"vfe.mlp.weight", "enc.s4.conv2.weight", "dec.s1.inv.weight",
                           "dec.s4.conv0.weight", "gcp.l1.conv5.weight", "gcp.l2.conv0.weight",
                           "gcp.proj.weight", "head.seg.weight", "head.bevseg.weight",
                           "head.det.hm.weight", "stage2.point.logit.weight",
                           "stage2.box.out.weight"}) {
    CHECK(a.contains(name));
  }
}

TEST_CASE("toy pipeline is total, bitwise deterministic, and shape-correct") {
  const PipelineConfig cfg = profile_config("toy");
  const SynthScene scene = synth_scene(21, 4, 4000, cfg);
  const WeightStore ws = init_weights(cfg, 7);

  const PipelineResult r1 = run_pipeline(scene.cloud, cfg, ws);
  const PipelineResult r2 = run_pipeline(scene.cloud, cfg, ws);

  REQUIRE(r1.s_final.rows == scene.cloud.size());
  REQUIRE(r1.s_final.cols == static_cast<std::size_t>(cfg.num_classes));
  REQUIRE(r1.panoptic.semantic.size() == scene.cloud.size());
  REQUIRE(r1.panoptic.instance.size() == scene.cloud.size());
  for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
    CHECK(r1.panoptic.semantic[i] >= 0);
    CHECK(r1.panoptic.semantic[i] < cfg.num_classes);
    CHECK(r1.panoptic.instance[i] >= 0);
    CHECK(r1.panoptic.instance[i] <= static_cast<int32_t>(r1.boxes.size()));
  }

  CHECK(r1.s_final.data == r2.s_final.data);
  CHECK(r1.panoptic.semantic == r2.panoptic.semantic);
  CHECK(r1.panoptic.instance == r2.panoptic.instance);
  CHECK(r1.boxes.size() == r2.boxes.size());

  // Decoder output keeps the VFE active set (submanifold contract end to end).
  CHECK(r1.decoder_out.coords == r1.map.voxel_coords);
  CHECK(r1.decoder_out.channels == cfg.unet.decoder_widths[3]);
  const BevGeometry geom = bev_geometry(cfg);
  CHECK(geom.height == 4);
  CHECK(geom.width == 4);
  CHECK(r1.f_out_bev.height == 4);
  CHECK(r1.f_out_bev.channels == cfg.gcp.level1_width + cfg.gcp.level2_width);
}

TEST_CASE("instance ids are class-consistent per box") {
  const PipelineConfig cfg = profile_config("toy");
  const SynthScene scene = synth_scene(33, 5, 5000, cfg);
  WeightStore ws = init_weights(cfg, 8);
  const PipelineResult r = run_pipeline(scene.cloud, cfg, ws);
  for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
    const int32_t inst = r.panoptic.instance[i];
    if (inst > 0) {
      CHECK(r.panoptic.semantic[i] == r.boxes[inst - 1].class_id);
      CHECK(r.index.ind[i] == inst - 1);
    }
  }
}

TEST_CASE("with zero decoded boxes S_final equals S_1st bitwise") {
  PipelineConfig cfg = profile_config("toy");
  cfg.score_thresh = 2.0;  // nothing can pass sqrt(hm * iou) > 2
  const SynthScene scene = synth_scene(44, 3, 3000, cfg);
  const WeightStore ws = init_weights(cfg, 9);
  const PipelineResult r = run_pipeline(scene.cloud, cfg, ws);
  REQUIRE(r.boxes.empty());
  REQUIRE(r.s_final.data.size() == r.s1.data.size());
  CHECK(std::memcmp(r.s_final.data.data(), r.s1.data.data(),
                    r.s1.data.size() * sizeof(double)) == 0);
}

TEST_CASE("losses are finite and reported when ground truth is supplied") {
  const PipelineConfig cfg = profile_config("toy");
  const SynthScene scene = synth_scene(55, 4, 4000, cfg);
  const WeightStore ws = init_weights(cfg, 10);
  GroundTruth gt;
  gt.labels = scene.labels;
  gt.boxes = scene.boxes;
  const PipelineResult r = run_pipeline(scene.cloud, cfg, ws, &gt);
  REQUIRE(r.has_loss);
  CHECK(r.loss.ce_v > 0.0);
  CHECK(r.loss.lovasz_v >= 0.0);
  CHECK(r.loss.hm >= 0.0);
  CHECK(r.loss.total == doctest::Approx((r.loss.l_seg + r.loss.l_det + r.loss.l_bev) / 2.0));
  for (const auto& [key, value] : r.loss.as_key_values()) {
    CAPTURE(key);
    CHECK(std::isfinite(value));
  }
}

TEST_CASE("tta pipeline runs and keeps totality") {
  const PipelineConfig cfg = profile_config("toy");
  const SynthScene scene = synth_scene(66, 2, 1500, cfg);
  const WeightStore ws = init_weights(cfg, 11);
  const PipelineResult r = run_pipeline_tta(scene.cloud, cfg, ws, make_tta_set());
  CHECK(r.s_final.rows == scene.cloud.size());
  CHECK(r.panoptic.semantic.size() == scene.cloud.size());
}

TEST_CASE("config files override profiles and reject unknown keys") {
  const std::string path = "/tmp/voxmt_test_cfg.txt";
  {
    std::ofstream os(path);
    os << "# comment\nprofile = toy\nscore_thresh = 0.25\nmax_boxes = 7\n";
  }
  const PipelineConfig cfg = load_config(path);
  CHECK(cfg.profile == "toy");
  CHECK(cfg.score_thresh == 0.25);
  CHECK(cfg.max_boxes == 7);
  CHECK(cfg.num_classes == 6);

  {
    std::ofstream os(path);
    os << "profile = toy\nnot_a_key = 1\n";
  }
  CHECK_THROWS_AS(load_config(path), ConfigError);
  std::remove(path.c_str());
}

TEST_CASE("unknown profile is a config error") {
  CHECK_THROWS_AS(profile_config("kitti"), ConfigError);
}
