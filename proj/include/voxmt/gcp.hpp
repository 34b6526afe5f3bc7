#pragma once

#include <cstdint>
#include <vector>

#include "voxmt/tensor.hpp"
#include "voxmt/weightstore.hpp"

namespace voxmt {

// Scatters the stride-8 encoder tensor to a dense BEV plane. Height slices
// are packed z-major into channels: output channel = z * C' + c.
DenseBEV sparse_to_bev(const SparseTensor& bottom);

struct GcpConfig {
  int32_t level1_depth = 6;
  int32_t level2_depth = 6;
  int32_t level1_width = 128;
  int32_t level2_width = 256;
};

// Two-level multi-scale extractor: level 1 is stride-1 convs, level 2 enters
// with a stride-2 conv and is upsampled back; outputs are concatenated
// (level1_width + level2_width channels). Weight names: gcp.l1.conv0 ...
DenseBEV bev_extractor(const DenseBEV& x, const WeightStore& weights, const GcpConfig& cfg);

// 1x1-projects the BEV map back to C'' * (D/dz) channels, un-packs the
// z-major channel layout, and gathers at the template's active coordinates.
// proj_* is the projection weight (bev_channels x out_channels) and bias.
SparseTensor bev_to_sparse(const DenseBEV& bev, const SparseTensor& templ,
                           const std::vector<float>& proj_weights,
                           const std::vector<float>& proj_bias, int32_t out_voxel_channels);

}  // namespace voxmt
