#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "voxmt/config.hpp"
#include "voxmt/heads.hpp"
#include "voxmt/io.hpp"
#include "voxmt/losses.hpp"
#include "voxmt/refine.hpp"
#include "voxmt/ttaens.hpp"
#include "voxmt/weightstore.hpp"

namespace voxmt {

struct SynthScene {
  PointCloud cloud;
  LabelSet labels;
  std::vector<Box3D> boxes;
};

// Deterministic pseudo-random scene: ground-plane and wall points for the
// stuff classes, box-shaped clusters for things. Reproducible from seed.
SynthScene synth_scene(uint64_t seed, int32_t n_objects, int32_t n_points,
                       const PipelineConfig& cfg);

// Xavier-uniform init (a = sqrt(6/(fan_in+fan_out))), zero biases, seeded.
WeightStore init_weights(const PipelineConfig& cfg, uint64_t seed);

struct GroundTruth {
  LabelSet labels;
  std::vector<Box3D> boxes;
};

struct PipelineResult {
  PointVoxelMap map;
  SparseTensor decoder_out;
  DenseBEV f_out_bev;
  ScoreMat s1;  // N x K first-stage semantic scores
  std::vector<Box3D> boxes;
  PointBoxIndex index;
  ScoreMat s2nd;
  ScoreMat s_final;
  PanopticLabel panoptic;
  bool has_loss = false;
  TaskLossReport loss;
};

BevGeometry bev_geometry(const PipelineConfig& cfg);

// Full first + second stage: voxelize -> VFE -> sparse U-Net with GCP
// bottleneck -> heads -> refinement -> panoptic assignment. Loss report is
// filled when ground truth is provided.
PipelineResult run_pipeline(const PointCloud& cloud, const PipelineConfig& cfg,
                            const WeightStore& weights, const GroundTruth* gt = nullptr);

// First-stage semantic scores only; the inference function behind TTA.
ScoreMat first_stage_scores(const PointCloud& cloud, const PipelineConfig& cfg,
                            const WeightStore& weights);

// run_pipeline with S_1st replaced by the TTA-averaged score matrix before
// the two-stage score fusion and panoptic assignment.
PipelineResult run_pipeline_tta(const PointCloud& cloud, const PipelineConfig& cfg,
                                const WeightStore& weights,
                                const std::vector<PointTransform>& transforms,
                                const GroundTruth* gt = nullptr);

}  // namespace voxmt
