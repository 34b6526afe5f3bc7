#include "voxmt/refine.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "voxmt/errors.hpp"

namespace voxmt {

std::vector<int32_t> ClassMap::thing_index() const {
  std::vector<int32_t> idx(static_cast<std::size_t>(num_classes), -1);
  for (std::size_t t = 0; t < thing_classes.size(); ++t) {
    idx[static_cast<std::size_t>(thing_classes[t])] = static_cast<int32_t>(t);
  }
  return idx;
}

void ClassMap::validate() const {
  if (num_classes <= 0) throw ConfigError("class map: num_classes must be positive");
  std::set<int32_t> seen;
  for (int32_t c : thing_classes) {
    if (c < 0 || c >= num_classes) {
      throw ConfigError("class map: thing class " + std::to_string(c) + " out of range");
    }
    if (!seen.insert(c).second) {
      throw ConfigError("class map: duplicate thing class " + std::to_string(c));
    }
  }
}

namespace {

// Box-frame coordinates of p relative to box.
std::array<double, 3> to_local(const Point& p, const Box3D& b) {
  const double dx = p.x - b.cx;
  const double dy = p.y - b.cy;
  const double dz = p.z - b.cz;
  const double c = std::cos(b.yaw);
  const double s = std::sin(b.yaw);
  return {c * dx + s * dy, -s * dx + c * dy, dz};
}

bool inside(const std::array<double, 3>& local, const Box3D& b) {
  return std::abs(local[0]) <= b.l / 2.0 && std::abs(local[1]) <= b.w / 2.0 &&
         std::abs(local[2]) <= b.h / 2.0;
}

}  // namespace

PointBoxIndex assign_points(const PointCloud& cloud, const std::vector<Box3D>& boxes) {
  PointBoxIndex idx;
  idx.ind.assign(cloud.size(), kNotInBox);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    int32_t best = kNotInBox;
    double best_score = 0.0;
    for (std::size_t b = 0; b < boxes.size(); ++b) {
      if (!inside(to_local(cloud.points[i], boxes[b]), boxes[b])) continue;
      if (best == kNotInBox || boxes[b].score > best_score) {
        best = static_cast<int32_t>(b);
        best_score = boxes[b].score;
      }
    }
    idx.ind[i] = best;
  }
  return idx;
}

std::vector<std::array<double, 3>> local_transform(const PointCloud& cloud,
                                                   const std::vector<Box3D>& boxes,
                                                   const PointBoxIndex& index) {
  std::vector<std::array<double, 3>> out(cloud.size(), {0.0, 0.0, 0.0});
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const int32_t b = index.ind[i];
    if (b == kNotInBox) continue;
    out[i] = to_local(cloud.points[i], boxes[static_cast<std::size_t>(b)]);
  }
  return out;
}

namespace {

struct Linear {
  std::size_t in = 0;
  std::size_t out = 0;
  const std::vector<float>* weight = nullptr;  // in x out
  const std::vector<float>* bias = nullptr;

  void forward(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(out, 0.0);
    for (std::size_t o = 0; o < out; ++o) y[o] = (*bias)[o];
    for (std::size_t i = 0; i < in; ++i) {
      const double v = x[i];
      if (v == 0.0) continue;
      const float* wr = weight->data() + i * out;
      for (std::size_t o = 0; o < out; ++o) y[o] += v * wr[o];
    }
  }
};

Linear linear_from_store(const WeightStore& ws, const std::string& prefix, std::size_t in) {
  const auto& w = ws.get(prefix + ".weight");
  if (w.dims.size() != 2 || w.dims[0] != in) {
    throw ConfigError("weight tensor '" + prefix + ".weight' must be rank 2 with " +
                      std::to_string(in) + " input rows");
  }
  const auto& b = ws.get(prefix + ".bias", {w.dims[1]});
  return Linear{in, w.dims[1], &w.data, &b.data};
}

void relu_vec(std::vector<double>& v) {
  for (double& x : v) x = x > 0.0 ? x : 0.0;
}

// Bilinear sample of every channel at fractional cell coordinates, clamped
// to the plane border.
std::vector<double> bilinear_sample(const DenseBEV& bev, double fx, double fy) {
  const auto clampi = [](int32_t v, int32_t hi) { return std::clamp(v, 0, hi - 1); };
  const double gx = std::clamp(fx - 0.5, 0.0, static_cast<double>(bev.width - 1));
  const double gy = std::clamp(fy - 0.5, 0.0, static_cast<double>(bev.height - 1));
  const int32_t x0 = static_cast<int32_t>(std::floor(gx));
  const int32_t y0 = static_cast<int32_t>(std::floor(gy));
  const int32_t x1 = clampi(x0 + 1, bev.width);
  const int32_t y1 = clampi(y0 + 1, bev.height);
  const double ax = gx - x0;
  const double ay = gy - y0;
  std::vector<double> out(static_cast<std::size_t>(bev.channels));
  for (int32_t c = 0; c < bev.channels; ++c) {
    const double v00 = bev.at(c, y0, x0), v01 = bev.at(c, y0, x1);
    const double v10 = bev.at(c, y1, x0), v11 = bev.at(c, y1, x1);
    out[static_cast<std::size_t>(c)] =
        (1.0 - ay) * ((1.0 - ax) * v00 + ax * v01) + ay * ((1.0 - ax) * v10 + ax * v11);
  }
  return out;
}

void softmax_row(double* row, std::size_t k) {
  const double m = *std::max_element(row, row + k);
  double denom = 0.0;
  for (std::size_t c = 0; c < k; ++c) denom += std::exp(row[c] - m);
  for (std::size_t c = 0; c < k; ++c) row[c] = std::exp(row[c] - m) / denom;
}

}  // namespace

Stage2Scores second_stage_forward(const PointCloud& cloud, const std::vector<Box3D>& boxes,
                                  const PointBoxIndex& index, const PointVoxelMap& map,
                                  const SparseTensor& decoder_out, const DenseBEV& bev,
                                  const BevGeometry& geom, const WeightStore& weights,
                                  int32_t num_thing) {
  const std::size_t c_dec = static_cast<std::size_t>(decoder_out.channels);
  const Linear mlp0 = linear_from_store(weights, "stage2.point.mlp0", 3 + c_dec);
  const Linear mlp1 = linear_from_store(weights, "stage2.point.mlp1", mlp0.out);
  const Linear point_logit = linear_from_store(weights, "stage2.point.logit", mlp1.out);
  if (point_logit.out != 1) throw ConfigError("stage2.point.logit must have one output");
  const Linear box_mlp0 =
      linear_from_store(weights, "stage2.box.mlp0", mlp1.out + static_cast<std::size_t>(bev.channels));
  const Linear box_out = linear_from_store(weights, "stage2.box.out", box_mlp0.out);
  if (box_out.out != static_cast<std::size_t>(num_thing) + 1) {
    throw ConfigError("stage2.box.out must emit K_thing+1 classes");
  }

  const std::vector<std::array<double, 3>> local = local_transform(cloud, boxes, index);

  Stage2Scores s;
  s.s_point.assign(cloud.size(), 0.5);
  s.s_box = ScoreMat(boxes.size(), static_cast<std::size_t>(num_thing) + 1);

  // Pooled hidden features per box (componentwise max over its points).
  std::vector<std::vector<double>> pooled(boxes.size(), std::vector<double>(mlp1.out, 0.0));
  std::vector<bool> has_points(boxes.size(), false);

  std::vector<double> in(3 + c_dec), h0, h1, logit;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const int32_t b = index.ind[i];
    if (b == kNotInBox) continue;
    in[0] = local[i][0];
    in[1] = local[i][1];
    in[2] = local[i][2];
    const int32_t v = map.point_to_voxel[i];
    if (v == kOutOfRange) {
      std::fill(in.begin() + 3, in.end(), 0.0);
    } else {
      const float* row = decoder_out.row(static_cast<std::size_t>(v));
      for (std::size_t c = 0; c < c_dec; ++c) in[3 + c] = row[c];
    }
    mlp0.forward(in, h0);
    relu_vec(h0);
    mlp1.forward(h0, h1);
    relu_vec(h1);
    point_logit.forward(h1, logit);
    s.s_point[i] = 1.0 / (1.0 + std::exp(-logit[0]));

    auto& pool = pooled[static_cast<std::size_t>(b)];
    if (!has_points[static_cast<std::size_t>(b)]) {
      pool = h1;
      has_points[static_cast<std::size_t>(b)] = true;
    } else {
      for (std::size_t c = 0; c < h1.size(); ++c) pool[c] = std::max(pool[c], h1[c]);
    }
  }

  std::vector<double> box_in(box_mlp0.in), hb, out;
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    const double fx = (boxes[b].cx - geom.x_min) / geom.cell_x;
    const double fy = (boxes[b].cy - geom.y_min) / geom.cell_y;
    const std::vector<double> feat = bilinear_sample(bev, fx, fy);
    std::copy(pooled[b].begin(), pooled[b].end(), box_in.begin());
    std::copy(feat.begin(), feat.end(), box_in.begin() + static_cast<std::ptrdiff_t>(mlp1.out));
    box_mlp0.forward(box_in, hb);
    relu_vec(hb);
    box_out.forward(hb, out);
    double* row = s.s_box.row(b);
    std::copy(out.begin(), out.end(), row);
    softmax_row(row, s.s_box.cols);
  }
  return s;
}

ScoreMat fuse_s2nd(const std::vector<double>& s_point, const ScoreMat& s_box,
                   const PointBoxIndex& index) {
  const std::size_t k1 = s_box.cols;  // K_thing + 1
  ScoreMat out(s_point.size(), k1);
  for (std::size_t i = 0; i < s_point.size(); ++i) {
    const int32_t b = index.ind[i];
    if (b == kNotInBox) continue;
    const double sp = s_point[i];
    const double* box_row = s_box.row(static_cast<std::size_t>(b));
    double* row = out.row(i);
    for (std::size_t j = 0; j + 1 < k1; ++j) row[j] = sp * box_row[j];
    row[k1 - 1] = sp * box_row[k1 - 1] + (1.0 - sp);
  }
  return out;
}

ScoreMat fuse_final(const ScoreMat& s_1st, const ScoreMat& s_2nd, const PointBoxIndex& index,
                    const ClassMap& classes) {
  classes.validate();
  if (s_1st.cols != static_cast<std::size_t>(classes.num_classes)) {
    throw ConfigError("fuse_final: S_1st width disagrees with the class map");
  }
  if (s_2nd.cols != static_cast<std::size_t>(classes.num_thing()) + 1) {
    throw ConfigError("fuse_final: S_2nd width disagrees with the class map");
  }
  const std::vector<int32_t> thing_idx = classes.thing_index();
  const std::size_t empty = s_2nd.cols - 1;

  ScoreMat out(s_1st.rows, s_1st.cols);
  for (std::size_t i = 0; i < s_1st.rows; ++i) {
    const double* first = s_1st.row(i);
    double* row = out.row(i);
    if (index.ind[i] == kNotInBox) {
      std::copy(first, first + s_1st.cols, row);
      continue;
    }
    const double* second = s_2nd.row(i);
    const double e = second[empty];
    for (std::size_t c = 0; c < s_1st.cols; ++c) {
      const int32_t t = thing_idx[c];
      row[c] = first[c] * e + (t >= 0 ? second[static_cast<std::size_t>(t)] : 0.0);
    }
  }
  return out;
}

std::vector<int32_t> argmax_labels(const ScoreMat& scores) {
  std::vector<int32_t> labels(scores.rows, 0);
  for (std::size_t i = 0; i < scores.rows; ++i) {
    const double* row = scores.row(i);
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.cols; ++c) {
      if (row[c] > row[best]) best = c;
    }
    labels[i] = static_cast<int32_t>(best);
  }
  return labels;
}

PanopticLabel panoptic_assign(const std::vector<int32_t>& semantic_labels,
                              const std::vector<Box3D>& boxes, const PointBoxIndex& index) {
  PanopticLabel out;
  out.semantic = semantic_labels;
  out.instance.assign(semantic_labels.size(), 0);
  for (std::size_t i = 0; i < semantic_labels.size(); ++i) {
    const int32_t b = index.ind[i];
    if (b == kNotInBox) continue;
    if (semantic_labels[i] == boxes[static_cast<std::size_t>(b)].class_id) {
      out.instance[i] = b + 1;
    }
  }
  return out;
}

}  // namespace voxmt
