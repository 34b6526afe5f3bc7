#include "voxmt/sparse_conv.hpp"

#include <algorithm>
#include <string>

#include "voxmt/errors.hpp"
#include "voxmt/kernels.hpp"

namespace voxmt {

void ConvSpec::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (kernel[a] <= 0 || kernel[a] % 2 == 0) {
      throw ConfigError("kernel sizes must be odd and positive");
    }
  }
  if (stride != 1 && stride != 2) throw ConfigError("conv stride must be 1 or 2");
  if (mode == ConvMode::kSubmanifold && stride != 1) {
    throw ConfigError("submanifold convolution requires stride 1");
  }
  if (in_channels <= 0 || out_channels <= 0) throw ConfigError("channel counts must be positive");
  const std::size_t expected = static_cast<std::size_t>(kernel_volume()) * in_channels *
                               static_cast<std::size_t>(out_channels);
  if (weights.size() != expected) {
    throw ConfigError("conv weight size " + std::to_string(weights.size()) + ", expected " +
                      std::to_string(expected));
  }
  if (!bias.empty() && bias.size() != static_cast<std::size_t>(out_channels)) {
    throw ConfigError("conv bias length mismatch");
  }
}

namespace {

// Offset for kernel slice k, enumerated z-major from -floor(k/2).
Coord offset_for(int32_t k, const std::array<int32_t, 3>& kernel) {
  const int32_t dx = k % kernel[0];
  const int32_t dy = (k / kernel[0]) % kernel[1];
  const int32_t dz = k / (kernel[0] * kernel[1]);
  return Coord{dx - kernel[0] / 2, dy - kernel[1] / 2, dz - kernel[2] / 2};
}

}  // namespace

Rulebook build_rulebook(const SparseTensor& input, const ConvSpec& spec) {
  spec.validate();
  if (spec.mode == ConvMode::kInverse) {
    throw ConfigError("inverse convolution reuses a saved rulebook; none is built");
  }
  const int32_t kvol = spec.kernel_volume();
  Rulebook rb;
  rb.pairs.resize(static_cast<std::size_t>(kvol));
  rb.input_coords = input.coords;
  rb.input_grid_dims = input.grid_dims;

  if (spec.mode == ConvMode::kSubmanifold) {
    rb.output_coords = input.coords;
    rb.output_grid_dims = input.grid_dims;
    CoordMap map(input.size());
    for (std::size_t i = 0; i < input.size(); ++i) {
      map.insert(pack_coord(input.coords[i], input.grid_dims), static_cast<int32_t>(i));
    }
    for (std::size_t o = 0; o < input.size(); ++o) {
      for (int32_t k = 0; k < kvol; ++k) {
        const Coord off = offset_for(k, spec.kernel);
        const Coord nb{input.coords[o][0] + off[0], input.coords[o][1] + off[1],
                       input.coords[o][2] + off[2]};
        if (!in_grid(nb, input.grid_dims)) continue;
        const int32_t i = map.find(pack_coord(nb, input.grid_dims));
        if (i >= 0) rb.pairs[k].emplace_back(i, static_cast<int32_t>(o));
      }
    }
    return rb;
  }

  // Standard (dilating) mode: an output site exists at every stride-anchored
  // kernel position covering at least one active input.
  const int32_t s = spec.stride;
  rb.output_grid_dims = {(input.grid_dims[0] + s - 1) / s, (input.grid_dims[1] + s - 1) / s,
                         (input.grid_dims[2] + s - 1) / s};
  CoordMap out_map(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    for (int32_t k = 0; k < kvol; ++k) {
      const Coord off = offset_for(k, spec.kernel);
      Coord anchor{};
      bool ok = true;
      for (int a = 0; a < 3; ++a) {
        const int32_t num = input.coords[i][a] - off[a];
        if (num < 0 || num % s != 0) {
          ok = false;
          break;
        }
        anchor[a] = num / s;
      }
      if (!ok || !in_grid(anchor, rb.output_grid_dims)) continue;
      const int64_t key = pack_coord(anchor, rb.output_grid_dims);
      if (out_map.find(key) < 0) {
        out_map.insert(key, 0);
        rb.output_coords.push_back(anchor);
      }
    }
  }
  std::sort(rb.output_coords.begin(), rb.output_coords.end(), coord_less);
  CoordMap rows(rb.output_coords.size());
  for (std::size_t o = 0; o < rb.output_coords.size(); ++o) {
    rows.insert(pack_coord(rb.output_coords[o], rb.output_grid_dims), static_cast<int32_t>(o));
  }
  for (std::size_t i = 0; i < input.size(); ++i) {
    for (int32_t k = 0; k < kvol; ++k) {
      const Coord off = offset_for(k, spec.kernel);
      Coord anchor{};
      bool ok = true;
      for (int a = 0; a < 3; ++a) {
        const int32_t num = input.coords[i][a] - off[a];
        if (num < 0 || num % s != 0) {
          ok = false;
          break;
        }
        anchor[a] = num / s;
      }
      if (!ok || !in_grid(anchor, rb.output_grid_dims)) continue;
      const int32_t o = rows.find(pack_coord(anchor, rb.output_grid_dims));
      rb.pairs[k].emplace_back(static_cast<int32_t>(i), o);
    }
  }
  return rb;
}

namespace {

void apply_pairs(const std::vector<std::vector<std::pair<int32_t, int32_t>>>& pairs,
                 const std::vector<float>& weights, int32_t in_ch, int32_t out_ch,
                 const SparseTensor& input, SparseTensor& output, bool reversed) {
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const float* wk = weights.data() + k * static_cast<std::size_t>(in_ch) * out_ch;
    for (const auto& [a, b] : pairs[k]) {
      const int32_t src = reversed ? b : a;
      const int32_t dst = reversed ? a : b;
      const float* in_row = input.row(static_cast<std::size_t>(src));
      float* out_row = output.row(static_cast<std::size_t>(dst));
      for (int32_t ci = 0; ci < in_ch; ++ci) {
        kernels::axpy(out_row, wk + static_cast<std::size_t>(ci) * out_ch, in_row[ci],
                      static_cast<std::size_t>(out_ch));
      }
    }
  }
}

void fill_bias(SparseTensor& t, const std::vector<float>& bias) {
  if (bias.empty()) return;
  for (std::size_t r = 0; r < t.size(); ++r) {
    std::copy(bias.begin(), bias.end(), t.row(r));
  }
}

}  // namespace

SparseTensor sparse_conv(const SparseTensor& input, const ConvSpec& spec, const Rulebook& rb) {
  spec.validate();
  if (input.channels != spec.in_channels) {
    throw ConfigError("sparse_conv: input has " + std::to_string(input.channels) +
                      " channels, spec expects " + std::to_string(spec.in_channels));
  }
  SparseTensor out;
  out.coords = rb.output_coords;
  out.channels = spec.out_channels;
  out.grid_dims = rb.output_grid_dims;
  out.stride = input.stride * spec.stride;
  out.features.assign(out.size() * static_cast<std::size_t>(spec.out_channels), 0.0f);
  fill_bias(out, spec.bias);
  apply_pairs(rb.pairs, spec.weights, spec.in_channels, spec.out_channels, input, out,
              /*reversed=*/false);
  return out;
}

SparseTensor inverse_conv(const SparseTensor& input, const ConvSpec& spec,
                          const Rulebook& saved_rb) {
  spec.validate();
  if (spec.mode != ConvMode::kInverse) throw ConfigError("inverse_conv requires INVERSE mode");
  if (input.channels != spec.in_channels) {
    throw ConfigError("inverse_conv: channel mismatch");
  }
  if (input.coords != saved_rb.output_coords) {
    throw InternalError("inverse_conv: input sites do not match the saved rulebook's output sites");
  }
  if (static_cast<int32_t>(saved_rb.pairs.size()) != spec.kernel_volume()) {
    throw ConfigError("inverse_conv: kernel volume does not match the saved rulebook");
  }
  SparseTensor out;
  out.coords = saved_rb.input_coords;
  out.channels = spec.out_channels;
  out.grid_dims = saved_rb.input_grid_dims;
  out.stride = input.stride / 2;
  out.features.assign(out.size() * static_cast<std::size_t>(spec.out_channels), 0.0f);
  fill_bias(out, spec.bias);
  apply_pairs(saved_rb.pairs, spec.weights, spec.in_channels, spec.out_channels, input, out,
              /*reversed=*/true);
  return out;
}

SparseTensor concat_skip(const SparseTensor& decoder, const SparseTensor& encoder) {
  if (decoder.size() != encoder.size() || decoder.stride != encoder.stride) {
    throw InternalError("concat_skip: tensor shapes disagree (" + std::to_string(decoder.size()) +
                        " vs " + std::to_string(encoder.size()) + " rows)");
  }
  for (std::size_t r = 0; r < decoder.size(); ++r) {
    if (decoder.coords[r] != encoder.coords[r]) {
      throw InternalError("concat_skip: coordinate mismatch at row " + std::to_string(r));
    }
  }
  SparseTensor out;
  out.coords = decoder.coords;
  out.channels = decoder.channels + encoder.channels;
  out.grid_dims = decoder.grid_dims;
  out.stride = decoder.stride;
  out.features.resize(out.size() * static_cast<std::size_t>(out.channels));
  for (std::size_t r = 0; r < out.size(); ++r) {
    float* dst = out.row(r);
    std::copy(decoder.row(r), decoder.row(r) + decoder.channels, dst);
    std::copy(encoder.row(r), encoder.row(r) + encoder.channels, dst + decoder.channels);
  }
  return out;
}

namespace {

ConvSpec conv_from_store(const WeightStore& ws, const std::string& prefix, int32_t in_ch,
                         int32_t out_ch, ConvMode mode, int32_t stride) {
  ConvSpec spec;
  spec.mode = mode;
  spec.stride = stride;
  spec.in_channels = in_ch;
  spec.out_channels = out_ch;
  const uint32_t kvol = static_cast<uint32_t>(spec.kernel_volume());
  spec.weights = ws.get(prefix + ".weight",
                        {kvol, static_cast<uint32_t>(in_ch), static_cast<uint32_t>(out_ch)})
                     .data;
  spec.bias = ws.get(prefix + ".bias", {static_cast<uint32_t>(out_ch)}).data;
  return spec;
}

void relu_tensor(SparseTensor& t) {
  kernels::relu(t.features.data(), t.features.size());
}

}  // namespace

UnetOutput run_unet(const SparseTensor& input, const UnetConfig& arch, const WeightStore& weights,
                    const std::function<SparseTensor(const SparseTensor&)>& bottleneck) {
  if (arch.encoder_depths.size() != 4 || arch.encoder_widths.size() != 4 ||
      arch.decoder_widths.size() != 4) {
    throw ConfigError("run_unet: architecture needs 4 encoder and decoder stages");
  }

  UnetOutput out;
  std::vector<SparseTensor> skips;
  SparseTensor x = input;
  for (int s = 0; s < 4; ++s) {
    const std::string stage = "enc.s" + std::to_string(s + 1);
    const int32_t width = arch.encoder_widths[s];
    for (int c = 0; c < arch.encoder_depths[s]; ++c) {
      const bool entry_strided = (s > 0 && c == 0);
      ConvSpec spec = conv_from_store(
          weights, stage + ".conv" + std::to_string(c), x.channels, width,
          entry_strided ? ConvMode::kStrided : ConvMode::kSubmanifold, entry_strided ? 2 : 1);
      Rulebook rb = build_rulebook(x, spec);
      SparseTensor y = sparse_conv(x, spec, rb);
      if (entry_strided) out.saved_rulebooks.push_back(std::move(rb));
      relu_tensor(y);
      x = std::move(y);
    }
    skips.push_back(x);
  }

  out.encoder_bottom = skips[3];
  x = bottleneck ? bottleneck(out.encoder_bottom) : out.encoder_bottom;

  // Decoder stages 1-3: deconvolution through the saved encoder rulebook,
  // skip concat, then a submanifold mixing conv. Stage 4 is stride-1 only.
  for (int d = 0; d < 3; ++d) {
    const std::string stage = "dec.s" + std::to_string(d + 1);
    const int32_t width = arch.decoder_widths[d];
    ConvSpec inv =
        conv_from_store(weights, stage + ".inv", x.channels, width, ConvMode::kInverse, 1);
    x = inverse_conv(x, inv, out.saved_rulebooks[2 - d]);
    relu_tensor(x);
    x = concat_skip(x, skips[2 - d]);
    ConvSpec mix =
        conv_from_store(weights, stage + ".conv0", x.channels, width, ConvMode::kSubmanifold, 1);
    x = sparse_conv(x, mix, build_rulebook(x, mix));
    relu_tensor(x);
  }
  ConvSpec last = conv_from_store(weights, "dec.s4.conv0", x.channels, arch.decoder_widths[3],
                                  ConvMode::kSubmanifold, 1);
  x = sparse_conv(x, last, build_rulebook(x, last));
  relu_tensor(x);
  out.decoder_out = std::move(x);
  return out;
}

}  // namespace voxmt
