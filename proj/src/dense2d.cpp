#include "voxmt/dense2d.hpp"

#include <string>

#include "voxmt/errors.hpp"
#include "voxmt/kernels.hpp"

namespace voxmt {

void Conv2dSpec::validate() const {
  if (kernel_h % 2 == 0 || kernel_w % 2 == 0 || kernel_h <= 0 || kernel_w <= 0) {
    throw ConfigError("conv2d kernel sizes must be odd and positive");
  }
  if (stride != 1 && stride != 2) throw ConfigError("conv2d stride must be 1 or 2");
  if (in_channels <= 0 || out_channels <= 0) throw ConfigError("conv2d channel counts invalid");
  const std::size_t expected = static_cast<std::size_t>(kernel_h) * kernel_w * in_channels *
                               static_cast<std::size_t>(out_channels);
  if (weights.size() != expected) {
    throw ConfigError("conv2d weight size " + std::to_string(weights.size()) + ", expected " +
                      std::to_string(expected));
  }
  if (!bias.empty() && bias.size() != static_cast<std::size_t>(out_channels)) {
    throw ConfigError("conv2d bias length mismatch");
  }
}

DenseBEV conv2d(const DenseBEV& x, const Conv2dSpec& spec) {
  spec.validate();
  if (x.channels != spec.in_channels) {
    throw ConfigError("conv2d: input has " + std::to_string(x.channels) +
                      " channels, spec expects " + std::to_string(spec.in_channels));
  }
  const int32_t pad_h = spec.kernel_h / 2;
  const int32_t pad_w = spec.kernel_w / 2;
  const int32_t oh = (x.height + 2 * pad_h - spec.kernel_h) / spec.stride + 1;
  const int32_t ow = (x.width + 2 * pad_w - spec.kernel_w) / spec.stride + 1;
  DenseBEV out = make_bev(spec.out_channels, oh, ow);

  for (int32_t co = 0; co < spec.out_channels; ++co) {
    const float b = spec.bias.empty() ? 0.0f : spec.bias[co];
    for (int32_t oy = 0; oy < oh; ++oy) {
      float* out_row = &out.at(co, oy, 0);
      for (int32_t ox = 0; ox < ow; ++ox) out_row[ox] = b;
    }
  }
  // Accumulate one (tap, ci, co) plane contribution at a time; the stride-1
  // inner loop over x is a contiguous axpy.
  for (int32_t ky = 0; ky < spec.kernel_h; ++ky) {
    for (int32_t kx = 0; kx < spec.kernel_w; ++kx) {
      for (int32_t ci = 0; ci < spec.in_channels; ++ci) {
        const float* wrow =
            spec.weights.data() +
            ((static_cast<std::size_t>(ky) * spec.kernel_w + kx) * spec.in_channels + ci) *
                spec.out_channels;
        for (int32_t co = 0; co < spec.out_channels; ++co) {
          const float w = wrow[co];
          if (w == 0.0f) continue;
          for (int32_t oy = 0; oy < oh; ++oy) {
            const int32_t iy = oy * spec.stride + ky - pad_h;
            if (iy < 0 || iy >= x.height) continue;
            float* out_row = &out.at(co, oy, 0);
            const float* in_row =
                x.data.data() + (static_cast<std::size_t>(ci) * x.height + iy) * x.width;
            if (spec.stride == 1) {
              // valid ox range: 0 <= ox + kx - pad_w < width
              const int32_t lo = std::max<int32_t>(0, pad_w - kx);
              const int32_t hi = std::min<int32_t>(ow, x.width + pad_w - kx);
              if (hi > lo) {
                kernels::axpy(out_row + lo, in_row + lo + kx - pad_w, w,
                              static_cast<std::size_t>(hi - lo));
              }
            } else {
              for (int32_t ox = 0; ox < ow; ++ox) {
                const int32_t ix = ox * spec.stride + kx - pad_w;
                if (ix < 0 || ix >= x.width) continue;
                out_row[ox] += w * in_row[ix];
              }
            }
          }
        }
      }
    }
  }
  if (spec.relu) kernels::relu(out.data.data(), out.data.size());
  return out;
}

DenseBEV upsample2x(const DenseBEV& x) {
  DenseBEV out = make_bev(x.channels, x.height * 2, x.width * 2);
  for (int32_t c = 0; c < x.channels; ++c) {
    for (int32_t y = 0; y < x.height; ++y) {
      for (int32_t xx = 0; xx < x.width; ++xx) {
        const float v = x.at(c, y, xx);
        out.at(c, 2 * y, 2 * xx) = v;
        out.at(c, 2 * y, 2 * xx + 1) = v;
        out.at(c, 2 * y + 1, 2 * xx) = v;
        out.at(c, 2 * y + 1, 2 * xx + 1) = v;
      }
    }
  }
  return out;
}

DenseVolume dense_conv3d_oracle(const DenseVolume& x, const std::array<int32_t, 3>& kernel,
                                const std::vector<float>& weights, int32_t out_channels,
                                int32_t stride) {
  const int32_t rx = kernel[0] / 2, ry = kernel[1] / 2, rz = kernel[2] / 2;
  std::array<int32_t, 3> odims{};
  for (int a = 0; a < 3; ++a) {
    odims[a] = stride == 1 ? x.dims[a] : (x.dims[a] + 1) / 2;
  }
  DenseVolume out = make_volume(out_channels, odims);
  const int32_t in_ch = x.channels;
  for (int32_t co = 0; co < out_channels; ++co) {
    for (int32_t oz = 0; oz < odims[2]; ++oz) {
      for (int32_t oy = 0; oy < odims[1]; ++oy) {
        for (int32_t ox = 0; ox < odims[0]; ++ox) {
          float acc = 0.0f;
          int32_t k = 0;
          for (int32_t dz = -rz; dz <= rz; ++dz) {
            for (int32_t dy = -ry; dy <= ry; ++dy) {
              for (int32_t dx = -rx; dx <= rx; ++dx, ++k) {
                const int32_t ix = ox * stride + dx;
                const int32_t iy = oy * stride + dy;
                const int32_t iz = oz * stride + dz;
                if (ix < 0 || ix >= x.dims[0] || iy < 0 || iy >= x.dims[1] || iz < 0 ||
                    iz >= x.dims[2]) {
                  continue;
                }
                for (int32_t ci = 0; ci < in_ch; ++ci) {
                  acc += x.at(ci, ix, iy, iz) *
                         weights[(static_cast<std::size_t>(k) * in_ch + ci) * out_channels + co];
                }
              }
            }
          }
          out.at(co, ox, oy, oz) = acc;
        }
      }
    }
  }
  return out;
}

}  // namespace voxmt
