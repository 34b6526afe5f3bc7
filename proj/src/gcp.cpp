#include "voxmt/gcp.hpp"

#include <string>

#include "voxmt/dense2d.hpp"
#include "voxmt/errors.hpp"
#include "voxmt/kernels.hpp"

namespace voxmt {

DenseBEV sparse_to_bev(const SparseTensor& bottom) {
  const int32_t cp = bottom.channels;
  const int32_t w = bottom.grid_dims[0];
  const int32_t h = bottom.grid_dims[1];
  const int32_t d = bottom.grid_dims[2];
  DenseBEV bev = make_bev(cp * d, h, w);
  for (std::size_t r = 0; r < bottom.size(); ++r) {
    const Coord& c = bottom.coords[r];
    if (!in_grid(c, bottom.grid_dims)) {
      throw InternalError("sparse_to_bev: coordinate outside the stride-8 grid at row " +
                          std::to_string(r));
    }
    const float* src = bottom.row(r);
    for (int32_t ch = 0; ch < cp; ++ch) {
      bev.at(c[2] * cp + ch, c[1], c[0]) = src[ch];
    }
  }
  return bev;
}

namespace {

Conv2dSpec conv2d_from_store(const WeightStore& ws, const std::string& prefix, int32_t kh,
                             int32_t kw, int32_t in_ch, int32_t out_ch, int32_t stride,
                             bool relu) {
  Conv2dSpec spec;
  spec.kernel_h = kh;
  spec.kernel_w = kw;
  spec.in_channels = in_ch;
  spec.out_channels = out_ch;
  spec.stride = stride;
  spec.relu = relu;
  spec.weights = ws.get(prefix + ".weight",
                        {static_cast<uint32_t>(kh), static_cast<uint32_t>(kw),
                         static_cast<uint32_t>(in_ch), static_cast<uint32_t>(out_ch)})
                     .data;
  spec.bias = ws.get(prefix + ".bias", {static_cast<uint32_t>(out_ch)}).data;
  return spec;
}

}  // namespace

DenseBEV bev_extractor(const DenseBEV& x, const WeightStore& weights, const GcpConfig& cfg) {
  DenseBEV l1 = x;
  for (int32_t i = 0; i < cfg.level1_depth; ++i) {
    Conv2dSpec spec = conv2d_from_store(weights, "gcp.l1.conv" + std::to_string(i), 3, 3,
                                        l1.channels, cfg.level1_width, 1, true);
    l1 = conv2d(l1, spec);
  }
  DenseBEV l2 = l1;
  for (int32_t i = 0; i < cfg.level2_depth; ++i) {
    Conv2dSpec spec = conv2d_from_store(weights, "gcp.l2.conv" + std::to_string(i), 3, 3,
                                        l2.channels, cfg.level2_width, i == 0 ? 2 : 1, true);
    l2 = conv2d(l2, spec);
  }
  DenseBEV up = upsample2x(l2);
  if (up.height != l1.height || up.width != l1.width) {
    throw ConfigError("bev_extractor: input height/width must be even for the two-level merge");
  }
  DenseBEV out = make_bev(l1.channels + up.channels, l1.height, l1.width);
  std::copy(l1.data.begin(), l1.data.end(), out.data.begin());
  std::copy(up.data.begin(), up.data.end(), out.data.begin() + l1.data.size());
  return out;
}

SparseTensor bev_to_sparse(const DenseBEV& bev, const SparseTensor& templ,
                           const std::vector<float>& proj_weights,
                           const std::vector<float>& proj_bias, int32_t out_voxel_channels) {
  const int32_t d = templ.grid_dims[2];
  const int32_t proj_out = out_voxel_channels * d;
  if (bev.height != templ.grid_dims[1] || bev.width != templ.grid_dims[0]) {
    throw ConfigError("bev_to_sparse: BEV plane size does not match the template grid");
  }
  if (proj_weights.size() !=
      static_cast<std::size_t>(bev.channels) * static_cast<std::size_t>(proj_out)) {
    throw ConfigError("bev_to_sparse: projection weight shape mismatch (" +
                      std::to_string(proj_weights.size()) + " values for " +
                      std::to_string(bev.channels) + "x" + std::to_string(proj_out) + ")");
  }
  if (!proj_bias.empty() && proj_bias.size() != static_cast<std::size_t>(proj_out)) {
    throw ConfigError("bev_to_sparse: projection bias length mismatch");
  }

  SparseTensor out;
  out.coords = templ.coords;
  out.channels = out_voxel_channels;
  out.grid_dims = templ.grid_dims;
  out.stride = templ.stride;
  out.features.assign(out.size() * static_cast<std::size_t>(out_voxel_channels), 0.0f);

  for (std::size_t r = 0; r < out.size(); ++r) {
    const Coord& c = templ.coords[r];
    float* dst = out.row(r);
    if (!proj_bias.empty()) {
      const float* bslice = proj_bias.data() + static_cast<std::size_t>(c[2]) * out_voxel_channels;
      std::copy(bslice, bslice + out_voxel_channels, dst);
    }
    // Only the channel slice for this voxel's height is needed.
    for (int32_t cb = 0; cb < bev.channels; ++cb) {
      const float v = bev.at(cb, c[1], c[0]);
      if (v == 0.0f) continue;
      const float* wslice = proj_weights.data() + static_cast<std::size_t>(cb) * proj_out +
                            static_cast<std::size_t>(c[2]) * out_voxel_channels;
      kernels::axpy(dst, wslice, v, static_cast<std::size_t>(out_voxel_channels));
    }
  }
  return out;
}

}  // namespace voxmt
