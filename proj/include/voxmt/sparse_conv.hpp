#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "voxmt/tensor.hpp"
#include "voxmt/weightstore.hpp"

namespace voxmt {

enum class ConvMode { kSubmanifold, kStrided, kInverse };

struct ConvSpec {
  std::array<int32_t, 3> kernel{3, 3, 3};  // (kx, ky, kz), odd
  int32_t stride = 1;                      // 1 or 2
  int32_t in_channels = 0;
  int32_t out_channels = 0;
  std::vector<float> weights;  // kernel_volume x in x out, row-major
  std::vector<float> bias;     // out_channels or empty
  ConvMode mode = ConvMode::kSubmanifold;

  int32_t kernel_volume() const { return kernel[0] * kernel[1] * kernel[2]; }
  void validate() const;
};

// Gather/scatter pair lists per kernel offset. Offsets are enumerated
// z-major (dz outer, then dy, then dx), each from -floor(k/2) to +floor(k/2);
// a pair (i -> o) means input row i contributes through weight slice k.
struct Rulebook {
  std::vector<std::vector<std::pair<int32_t, int32_t>>> pairs;
  std::vector<Coord> output_coords;  // sorted by (iz, iy, ix); == input coords for submanifold
  std::array<int32_t, 3> output_grid_dims{};
  std::vector<Coord> input_coords;
  std::array<int32_t, 3> input_grid_dims{};
};

Rulebook build_rulebook(const SparseTensor& input, const ConvSpec& spec);

// out[o] = bias + sum_k sum_{(i->o)} features[i] . W[k]
SparseTensor sparse_conv(const SparseTensor& input, const ConvSpec& spec, const Rulebook& rb);

// Reverses a saved strided rulebook: output sites are the encoder layer's
// input sites, out[i] = sum_k sum_{(i->o)} features[o] . W[k], stride halves.
SparseTensor inverse_conv(const SparseTensor& input, const ConvSpec& spec,
                          const Rulebook& saved_rb);

// Horizontal feature concat; coords must match exactly (set and order).
SparseTensor concat_skip(const SparseTensor& decoder, const SparseTensor& encoder);

struct UnetConfig {
  std::vector<int32_t> encoder_depths{2, 3, 3, 3};   // convs per encoder stage
  std::vector<int32_t> encoder_widths{32, 64, 128, 256};
  std::vector<int32_t> decoder_widths{128, 64, 32, 32};
};

struct UnetOutput {
  SparseTensor decoder_out;     // stride 1
  SparseTensor encoder_bottom;  // stride 8, input to GCP
  std::vector<Rulebook> saved_rulebooks;  // one per strided encoder entry conv
};

// Sparse U-Net: 4 encoder stages (stride-2 entry conv at stages 2-4) and a
// mirrored decoder reusing the saved rulebooks for deconvolution. The
// bottleneck hook transforms the stride-8 tensor between encoder and decoder
// (identity when absent); the pipeline plugs GCP in here. Layer weights are
// looked up by name, e.g. "enc.s2.conv0.weight".
UnetOutput run_unet(const SparseTensor& input, const UnetConfig& arch, const WeightStore& weights,
                    const std::function<SparseTensor(const SparseTensor&)>& bottleneck = {});

}  // namespace voxmt
