#pragma once

#include <cstdint>
#include <vector>

#include "voxmt/tensor.hpp"
#include "voxmt/weightstore.hpp"

namespace voxmt {

struct Box3D {
  double cx = 0.0, cy = 0.0, cz = 0.0;  // meters
  double l = 0.0, w = 0.0, h = 0.0;     // meters
  double yaw = 0.0;                     // radians, (-pi, pi]
  int32_t class_id = 0;                 // thing class (global id)
  double score = 0.0;
};

// BEV plane geometry: world extent and cell size of the stride-8 grid.
struct BevGeometry {
  double x_min = 0.0;
  double y_min = 0.0;
  double cell_x = 0.0;  // meters per BEV cell
  double cell_y = 0.0;
  int32_t height = 0;  // rows (y)
  int32_t width = 0;   // cols (x)
};

// Per-voxel linear layer to K class logits.
SparseTensor seg_head(const SparseTensor& decoder_out, const std::vector<float>& weight,
                      const std::vector<float>& bias, int32_t num_classes);

// 1x1 conv to K logit channels.
DenseBEV bev_seg_head(const DenseBEV& bev, const WeightStore& weights, int32_t num_classes);

struct DetOutput {
  DenseBEV heatmap;  // K_thing channels, after sigmoid
  DenseBEV reg;      // 8 channels: dx, dy, z, log l, log w, log h, sin yaw, cos yaw
  DenseBEV iou;      // 1 channel
};

// Three 1x1 conv branches off the BEV feature map (weight names head.det.*).
DetOutput det_head(const DenseBEV& bev, const WeightStore& weights, int32_t num_thing);

struct RegTarget {
  int32_t row = 0;  // BEV cell of the box center
  int32_t col = 0;
  int32_t thing_idx = 0;         // heatmap channel
  std::array<double, 8> values;  // dx, dy, z, log l, log w, log h, sin, cos
  double iou_target = 0.0;
};

struct DetTargets {
  DenseBEV heatmap;  // K_thing x H x W, peak 1.0 at each center cell
  std::vector<RegTarget> reg_targets;
  int32_t skipped_out_of_range = 0;
};

// Splats a Gaussian per ground-truth box (min-overlap-0.1 radius heuristic),
// elementwise max where boxes overlap. thing_index maps global class ids to
// heatmap channels (-1 for stuff classes). iou_targets parallel to gt_boxes
// (all 1.0 when empty).
DetTargets render_targets(const std::vector<Box3D>& gt_boxes, const BevGeometry& geom,
                          const std::vector<int32_t>& thing_index,
                          const std::vector<double>& iou_targets = {});

// Peak picking with a 3x3 plateau-breaking max filter; final score is
// hm^(1-alpha) * iou^alpha with alpha = 0.5; boxes sorted by that score
// descending (ties: lowest (row, col)). thing_classes maps heatmap channels
// back to global class ids.
std::vector<Box3D> decode_boxes(const DetOutput& det, const BevGeometry& geom,
                                const std::vector<int32_t>& thing_classes, int32_t max_boxes,
                                double score_thresh);

}  // namespace voxmt
