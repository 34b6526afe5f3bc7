#include "voxmt/heads.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "voxmt/dense2d.hpp"
#include "voxmt/errors.hpp"
#include "voxmt/kernels.hpp"

namespace voxmt {

SparseTensor seg_head(const SparseTensor& decoder_out, const std::vector<float>& weight,
                      const std::vector<float>& bias, int32_t num_classes) {
  const int32_t c_in = decoder_out.channels;
  if (weight.size() != static_cast<std::size_t>(c_in) * num_classes ||
      bias.size() != static_cast<std::size_t>(num_classes)) {
    throw ConfigError("seg_head: weight shape mismatch for " + std::to_string(c_in) + "x" +
                      std::to_string(num_classes));
  }
  SparseTensor out;
  out.coords = decoder_out.coords;
  out.channels = num_classes;
  out.grid_dims = decoder_out.grid_dims;
  out.stride = decoder_out.stride;
  out.features.resize(out.size() * static_cast<std::size_t>(num_classes));
  for (std::size_t r = 0; r < out.size(); ++r) {
    float* dst = out.row(r);
    std::copy(bias.begin(), bias.end(), dst);
    const float* src = decoder_out.row(r);
    for (int32_t c = 0; c < c_in; ++c) {
      kernels::axpy(dst, weight.data() + static_cast<std::size_t>(c) * num_classes, src[c],
                    static_cast<std::size_t>(num_classes));
    }
  }
  return out;
}

namespace {

Conv2dSpec conv1x1(const WeightStore& ws, const std::string& prefix, int32_t in_ch,
                   int32_t out_ch) {
  Conv2dSpec spec;
  spec.kernel_h = 1;
  spec.kernel_w = 1;
  spec.in_channels = in_ch;
  spec.out_channels = out_ch;
  spec.weights =
      ws.get(prefix + ".weight", {1, 1, static_cast<uint32_t>(in_ch), static_cast<uint32_t>(out_ch)})
          .data;
  spec.bias = ws.get(prefix + ".bias", {static_cast<uint32_t>(out_ch)}).data;
  return spec;
}

// CenterNet-style radius so every center within it keeps IoU >= min_overlap
// with the ground-truth footprint.
int32_t gaussian_radius(double h, double w, double min_overlap) {
  const double a1 = 1.0, b1 = h + w, c1 = w * h * (1.0 - min_overlap) / (1.0 + min_overlap);
  const double r1 = (b1 + std::sqrt(std::max(0.0, b1 * b1 - 4.0 * a1 * c1))) / 2.0;
  const double a2 = 4.0, b2 = 2.0 * (h + w), c2 = (1.0 - min_overlap) * w * h;
  const double r2 = (b2 + std::sqrt(std::max(0.0, b2 * b2 - 4.0 * a2 * c2))) / (2.0 * a2);
  const double a3 = 4.0 * min_overlap, b3 = -2.0 * min_overlap * (h + w),
               c3 = (min_overlap - 1.0) * w * h;
  const double r3 = (b3 + std::sqrt(std::max(0.0, b3 * b3 - 4.0 * a3 * c3))) / (2.0 * a3);
  const double r = std::min({r1, r2, r3});
  return std::max<int32_t>(0, static_cast<int32_t>(r));
}

}  // namespace

DenseBEV bev_seg_head(const DenseBEV& bev, const WeightStore& weights, int32_t num_classes) {
  return conv2d(bev, conv1x1(weights, "head.bevseg", bev.channels, num_classes));
}

DetOutput det_head(const DenseBEV& bev, const WeightStore& weights, int32_t num_thing) {
  DetOutput out;
  out.heatmap = conv2d(bev, conv1x1(weights, "head.det.hm", bev.channels, num_thing));
  for (float& v : out.heatmap.data) v = 1.0f / (1.0f + std::exp(-v));
  out.reg = conv2d(bev, conv1x1(weights, "head.det.reg", bev.channels, 8));
  out.iou = conv2d(bev, conv1x1(weights, "head.det.iou", bev.channels, 1));
  return out;
}

DetTargets render_targets(const std::vector<Box3D>& gt_boxes, const BevGeometry& geom,
                          const std::vector<int32_t>& thing_index,
                          const std::vector<double>& iou_targets) {
  const int32_t num_thing =
      thing_index.empty() ? 0
                          : 1 + *std::max_element(thing_index.begin(), thing_index.end());
  DetTargets t;
  t.heatmap = make_bev(num_thing, geom.height, geom.width);
  for (std::size_t b = 0; b < gt_boxes.size(); ++b) {
    const Box3D& box = gt_boxes[b];
    if (box.class_id < 0 || box.class_id >= static_cast<int32_t>(thing_index.size()) ||
        thing_index[box.class_id] < 0) {
      throw ConfigError("render_targets: box class " + std::to_string(box.class_id) +
                        " is not a thing class");
    }
    const int32_t ch = thing_index[box.class_id];
    const double fx = (box.cx - geom.x_min) / geom.cell_x;
    const double fy = (box.cy - geom.y_min) / geom.cell_y;
    const int32_t col = static_cast<int32_t>(std::floor(fx));
    const int32_t row = static_cast<int32_t>(std::floor(fy));
    if (col < 0 || col >= geom.width || row < 0 || row >= geom.height) {
      ++t.skipped_out_of_range;
      continue;
    }
    const int32_t radius =
        gaussian_radius(box.w / geom.cell_y, box.l / geom.cell_x, /*min_overlap=*/0.1);
    const double sigma = (2.0 * radius + 1.0) / 6.0;
    for (int32_t dy = -radius; dy <= radius; ++dy) {
      for (int32_t dx = -radius; dx <= radius; ++dx) {
        const int32_t r = row + dy, c = col + dx;
        if (r < 0 || r >= geom.height || c < 0 || c >= geom.width) continue;
        const float g = static_cast<float>(
            std::exp(-(static_cast<double>(dx) * dx + static_cast<double>(dy) * dy) /
                     (2.0 * sigma * sigma)));
        float& cell = t.heatmap.at(ch, r, c);
        cell = std::max(cell, g);
      }
    }
    t.heatmap.at(ch, row, col) = 1.0f;

    RegTarget rt;
    rt.row = row;
    rt.col = col;
    rt.thing_idx = ch;
    rt.values = {fx - col,          fy - row,          box.cz,
                 std::log(box.l),   std::log(box.w),   std::log(box.h),
                 std::sin(box.yaw), std::cos(box.yaw)};
    rt.iou_target = iou_targets.empty() ? 1.0 : iou_targets[b];
    t.reg_targets.push_back(rt);
  }
  return t;
}

std::vector<Box3D> decode_boxes(const DetOutput& det, const BevGeometry& geom,
                                const std::vector<int32_t>& thing_classes, int32_t max_boxes,
                                double score_thresh) {
  struct Candidate {
    double score;
    int32_t row, col, ch;
  };
  std::vector<Candidate> cands;
  const DenseBEV& hm = det.heatmap;
  for (int32_t ch = 0; ch < hm.channels; ++ch) {
    for (int32_t r = 0; r < hm.height; ++r) {
      for (int32_t c = 0; c < hm.width; ++c) {
        const float v = hm.at(ch, r, c);
        if (v <= 0.0f) continue;
        // 3x3 local maximum; plateaus broken toward the lowest (row, col).
        bool peak = true;
        for (int32_t dy = -1; dy <= 1 && peak; ++dy) {
          for (int32_t dx = -1; dx <= 1 && peak; ++dx) {
            if (dy == 0 && dx == 0) continue;
            const int32_t nr = r + dy, nc = c + dx;
            if (nr < 0 || nr >= hm.height || nc < 0 || nc >= hm.width) continue;
            const float nv = hm.at(ch, nr, nc);
            if (nv > v || (nv == v && (nr < r || (nr == r && nc < c)))) peak = false;
          }
        }
        if (!peak) continue;
        const double iou = std::clamp(static_cast<double>(det.iou.at(0, r, c)), 0.0, 1.0);
        const double score = std::sqrt(static_cast<double>(v) * iou);  // alpha = 0.5
        if (score > score_thresh) cands.push_back({score, r, c, ch});
      }
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.row != b.row) return a.row < b.row;
    if (a.col != b.col) return a.col < b.col;
    return a.ch < b.ch;
  });
  if (static_cast<int32_t>(cands.size()) > max_boxes) cands.resize(max_boxes);

  std::vector<Box3D> boxes;
  boxes.reserve(cands.size());
  for (const Candidate& cd : cands) {
    Box3D b;
    const auto reg = [&](int32_t ch) { return static_cast<double>(det.reg.at(ch, cd.row, cd.col)); };
    b.cx = geom.x_min + (cd.col + reg(0)) * geom.cell_x;
    b.cy = geom.y_min + (cd.row + reg(1)) * geom.cell_y;
    b.cz = reg(2);
    b.l = std::exp(reg(3));
    b.w = std::exp(reg(4));
    b.h = std::exp(reg(5));
    b.yaw = std::atan2(reg(6), reg(7));
    b.class_id = thing_classes[cd.ch];
    b.score = cd.score;
    boxes.push_back(b);
  }
  return boxes;
}

}  // namespace voxmt
