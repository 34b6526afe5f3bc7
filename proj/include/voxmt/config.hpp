#pragma once

#include <string>
#include <vector>

#include "voxmt/gcp.hpp"
#include "voxmt/refine.hpp"
#include "voxmt/sparse_conv.hpp"
#include "voxmt/voxelizer.hpp"

namespace voxmt {

struct PipelineConfig {
  std::string profile = "waymo";
  VoxelConfig voxel;
  int32_t vfe_out = 16;
  UnetConfig unet;
  GcpConfig gcp;
  int32_t gcp_out = 256;  // C'' fed to the first decoder stage
  int32_t num_classes = 22;
  std::vector<int32_t> thing_classes;
  int32_t fallback_class = 0;
  int32_t max_boxes = 100;
  double score_thresh = 0.1;
  int32_t stage2_point_hidden = 32;
  int32_t stage2_box_hidden = 32;
  bool per_loss_uncertainty = false;

  ClassMap class_map() const;
  std::vector<int32_t> stuff_classes() const;
  int32_t num_thing() const { return static_cast<int32_t>(thing_classes.size()); }
  void validate() const;
};

// Built-in profiles. "waymo" mirrors the reference hyperparameter table;
// "toy" scales widths by 1/8 on a (32, 32, 16) grid for desk-scale runs.
PipelineConfig profile_config(const std::string& name);

// Flat key=value text config; a "profile" key picks the base profile and all
// other keys override it. Unknown keys are configuration errors.
PipelineConfig load_config(const std::string& path);

}  // namespace voxmt
