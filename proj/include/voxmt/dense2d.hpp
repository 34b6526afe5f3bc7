#pragma once

#include <cstdint>
#include <vector>

#include "voxmt/tensor.hpp"

namespace voxmt {

struct Conv2dSpec {
  int32_t kernel_h = 3;
  int32_t kernel_w = 3;
  int32_t in_channels = 0;
  int32_t out_channels = 0;
  int32_t stride = 1;
  bool relu = false;
  std::vector<float> weights;  // kh x kw x in x out, row-major
  std::vector<float> bias;     // out_channels or empty

  void validate() const;
};

// Cross-correlation with zero padding floor(k/2) ("same" size at stride 1).
DenseBEV conv2d(const DenseBEV& x, const Conv2dSpec& spec);

// Nearest-neighbor replication doubling H and W.
DenseBEV upsample2x(const DenseBEV& x);

// Direct dense 3D cross-correlation, zero bias, zero padding floor(k/2).
// Test oracle for the sparse engine; intentionally a straight loop nest.
// weights layout matches the sparse ConvSpec: kernel_volume x in x out with
// z-major offset enumeration.
DenseVolume dense_conv3d_oracle(const DenseVolume& x, const std::array<int32_t, 3>& kernel,
                                const std::vector<float>& weights, int32_t out_channels,
                                int32_t stride);

}  // namespace voxmt
