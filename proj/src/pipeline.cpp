#include "voxmt/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "voxmt/dense2d.hpp"
#include "voxmt/errors.hpp"
#include "voxmt/gcp.hpp"
#include "voxmt/metrics.hpp"
#include "voxmt/sparse_conv.hpp"

namespace voxmt {

namespace {

// Portable deterministic uniforms on top of the mt19937_64 stream.
struct Rng {
  std::mt19937_64 gen;

  explicit Rng(uint64_t seed) : gen(seed) {}

  double uniform(double lo, double hi) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
  }

  int32_t uniform_int(int32_t n) { return static_cast<int32_t>(gen() % static_cast<uint64_t>(n)); }
};

}  // namespace

SynthScene synth_scene(uint64_t seed, int32_t n_objects, int32_t n_points,
                       const PipelineConfig& cfg) {
  cfg.validate();
  if (cfg.num_thing() == 0 && n_objects > 0) {
    throw ConfigError("synth_scene: objects requested but no thing classes configured");
  }
  Rng rng(seed);
  SynthScene scene;
  const auto& v = cfg.voxel;
  const double z_ground = v.range_min[2] + 0.25 * (v.range_max[2] - v.range_min[2]);

  const int32_t obj_points_total = n_objects > 0 ? n_points * 3 / 10 : 0;
  const int32_t per_object = n_objects > 0 ? std::max(1, obj_points_total / n_objects) : 0;
  const int32_t stuff_points = n_points - per_object * n_objects;
  const int32_t wall_points = stuff_points * 15 / 100;
  const int32_t ground_points = stuff_points - wall_points;

  const auto push = [&scene](Point p, int32_t sem, int32_t inst) {
    scene.cloud.points.push_back(p);
    scene.labels.semantic.push_back(sem);
    scene.labels.instance.push_back(inst);
  };

  for (int32_t i = 0; i < ground_points; ++i) {
    Point p;
    p.x = static_cast<float>(rng.uniform(v.range_min[0] + 0.5, v.range_max[0] - 0.5));
    p.y = static_cast<float>(rng.uniform(v.range_min[1] + 0.5, v.range_max[1] - 0.5));
    p.z = static_cast<float>(z_ground + rng.uniform(-0.05, 0.05));
    p.intensity = static_cast<float>(rng.uniform(0.0, 1.0));
    push(p, 0, 0);
  }
  for (int32_t i = 0; i < wall_points; ++i) {
    Point p;
    p.x = static_cast<float>(rng.uniform(v.range_min[0] + 0.5, v.range_max[0] - 0.5));
    p.y = static_cast<float>(rng.uniform(v.range_min[1] + 0.5, v.range_max[1] - 0.5));
    p.z = static_cast<float>(z_ground + rng.uniform(0.0, 3.0));
    p.intensity = static_cast<float>(rng.uniform(0.0, 1.0));
    push(p, 1, 0);
  }

  for (int32_t b = 0; b < n_objects; ++b) {
    Box3D box;
    box.l = rng.uniform(2.0, 5.0);
    box.w = rng.uniform(1.0, 2.5);
    box.h = rng.uniform(1.0, 2.0);
    const double margin_x = 0.3 * (v.range_max[0] - v.range_min[0]);
    const double margin_y = 0.3 * (v.range_max[1] - v.range_min[1]);
    box.cx = rng.uniform(v.range_min[0] + margin_x, v.range_max[0] - margin_x);
    box.cy = rng.uniform(v.range_min[1] + margin_y, v.range_max[1] - margin_y);
    box.cz = z_ground + box.h / 2.0 + 0.1;
    box.yaw = rng.uniform(-std::numbers::pi, std::numbers::pi);
    box.class_id = cfg.thing_classes[static_cast<std::size_t>(rng.uniform_int(cfg.num_thing()))];
    box.score = 1.0;
    scene.boxes.push_back(box);

    const double cy = std::cos(box.yaw), sy = std::sin(box.yaw);
    for (int32_t i = 0; i < per_object; ++i) {
      const double lx = rng.uniform(-0.45, 0.45) * box.l;
      const double ly = rng.uniform(-0.45, 0.45) * box.w;
      const double lz = rng.uniform(-0.45, 0.45) * box.h;
      Point p;
      p.x = static_cast<float>(box.cx + cy * lx - sy * ly);
      p.y = static_cast<float>(box.cy + sy * lx + cy * ly);
      p.z = static_cast<float>(box.cz + lz);
      p.intensity = static_cast<float>(rng.uniform(0.0, 1.0));
      push(p, box.class_id, b + 1);
    }
  }
  return scene;
}

namespace {

void xavier(WeightStore& ws, Rng& rng, const std::string& name, std::vector<uint32_t> dims,
            std::size_t fan_in, std::size_t fan_out) {
  std::size_t n = 1;
  for (uint32_t d : dims) n *= d;
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<float> data(n);
  for (float& x : data) x = static_cast<float>(rng.uniform(-a, a));
  ws.put(name, std::move(dims), std::move(data));
}

void zero_bias(WeightStore& ws, const std::string& name, uint32_t n) {
  ws.put(name, {n}, std::vector<float>(n, 0.0f));
}

void conv3d_layer(WeightStore& ws, Rng& rng, const std::string& prefix, uint32_t cin,
                  uint32_t cout) {
  xavier(ws, rng, prefix + ".weight", {27, cin, cout}, 27ul * cin, 27ul * cout);
  zero_bias(ws, prefix + ".bias", cout);
}

void conv2d_layer(WeightStore& ws, Rng& rng, const std::string& prefix, uint32_t kh, uint32_t kw,
                  uint32_t cin, uint32_t cout) {
  xavier(ws, rng, prefix + ".weight", {kh, kw, cin, cout}, static_cast<std::size_t>(kh) * kw * cin,
         static_cast<std::size_t>(kh) * kw * cout);
  zero_bias(ws, prefix + ".bias", cout);
}

void linear_layer(WeightStore& ws, Rng& rng, const std::string& prefix, uint32_t in, uint32_t out) {
  xavier(ws, rng, prefix + ".weight", {in, out}, in, out);
  zero_bias(ws, prefix + ".bias", out);
}

}  // namespace

WeightStore init_weights(const PipelineConfig& cfg, uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  WeightStore ws;

  const uint32_t vfe_out = static_cast<uint32_t>(cfg.vfe_out);
  linear_layer(ws, rng, "vfe.mlp", kVfeInFeatures, vfe_out);

  const auto& ew = cfg.unet.encoder_widths;
  const auto& dw = cfg.unet.decoder_widths;
  uint32_t c = vfe_out;
  for (int s = 0; s < 4; ++s) {
    const uint32_t w = static_cast<uint32_t>(ew[s]);
    for (int l = 0; l < cfg.unet.encoder_depths[s]; ++l) {
      conv3d_layer(ws, rng, "enc.s" + std::to_string(s + 1) + ".conv" + std::to_string(l), c, w);
      c = w;
    }
  }

  const auto dims = cfg.voxel.grid_dims();
  const uint32_t dz = static_cast<uint32_t>(dims[2] / 8);
  const uint32_t bev_in = static_cast<uint32_t>(ew[3]) * dz;
  const uint32_t w1 = static_cast<uint32_t>(cfg.gcp.level1_width);
  const uint32_t w2 = static_cast<uint32_t>(cfg.gcp.level2_width);
  uint32_t gc = bev_in;
  for (int l = 0; l < cfg.gcp.level1_depth; ++l) {
    conv2d_layer(ws, rng, "gcp.l1.conv" + std::to_string(l), 3, 3, gc, w1);
    gc = w1;
  }
  for (int l = 0; l < cfg.gcp.level2_depth; ++l) {
    conv2d_layer(ws, rng, "gcp.l2.conv" + std::to_string(l), 3, 3, gc, w2);
    gc = w2;
  }
  const uint32_t bev_out = w1 + w2;
  const uint32_t proj_out = static_cast<uint32_t>(cfg.gcp_out) * dz;
  linear_layer(ws, rng, "gcp.proj", bev_out, proj_out);

  c = static_cast<uint32_t>(cfg.gcp_out);
  for (int d = 0; d < 3; ++d) {
    const uint32_t w = static_cast<uint32_t>(dw[d]);
    const std::string stage = "dec.s" + std::to_string(d + 1);
    conv3d_layer(ws, rng, stage + ".inv", c, w);
    conv3d_layer(ws, rng, stage + ".conv0", w + static_cast<uint32_t>(ew[2 - d]), w);
    c = w;
  }
  conv3d_layer(ws, rng, "dec.s4.conv0", c, static_cast<uint32_t>(dw[3]));

  const uint32_t k = static_cast<uint32_t>(cfg.num_classes);
  const uint32_t kt = static_cast<uint32_t>(cfg.num_thing());
  linear_layer(ws, rng, "head.seg", static_cast<uint32_t>(dw[3]), k);
  conv2d_layer(ws, rng, "head.bevseg", 1, 1, bev_out, k);
  conv2d_layer(ws, rng, "head.det.hm", 1, 1, bev_out, kt);
  conv2d_layer(ws, rng, "head.det.reg", 1, 1, bev_out, 8);
  conv2d_layer(ws, rng, "head.det.iou", 1, 1, bev_out, 1);

  const uint32_t hp = static_cast<uint32_t>(cfg.stage2_point_hidden);
  const uint32_t hb = static_cast<uint32_t>(cfg.stage2_box_hidden);
  linear_layer(ws, rng, "stage2.point.mlp0", 3 + static_cast<uint32_t>(dw[3]), hp);
  linear_layer(ws, rng, "stage2.point.mlp1", hp, hp);
  linear_layer(ws, rng, "stage2.point.logit", hp, 1);
  linear_layer(ws, rng, "stage2.box.mlp0", hp + bev_out, hb);
  linear_layer(ws, rng, "stage2.box.out", hb, kt + 1);
  return ws;
}

BevGeometry bev_geometry(const PipelineConfig& cfg) {
  const auto dims = cfg.voxel.grid_dims();
  BevGeometry g;
  g.x_min = cfg.voxel.range_min[0];
  g.y_min = cfg.voxel.range_min[1];
  g.cell_x = cfg.voxel.voxel_size[0] * 8.0;
  g.cell_y = cfg.voxel.voxel_size[1] * 8.0;
  g.width = dims[0] / 8;
  g.height = dims[1] / 8;
  return g;
}

namespace {

struct FirstStage {
  PointVoxelMap map;
  SparseTensor decoder_out;
  DenseBEV f_out_bev;
  SparseTensor seg_logits;
  ScoreMat s1;
};

SparseTensor softmax_tensor(const SparseTensor& logits) {
  SparseTensor probs = logits;
  const std::size_t k = static_cast<std::size_t>(logits.channels);
  for (std::size_t r = 0; r < probs.size(); ++r) {
    float* row = probs.row(r);
    const double m = *std::max_element(row, row + k);
    double denom = 0.0;
    for (std::size_t c = 0; c < k; ++c) denom += std::exp(row[c] - m);
    for (std::size_t c = 0; c < k; ++c) {
      row[c] = static_cast<float>(std::exp(row[c] - m) / denom);
    }
  }
  return probs;
}

FirstStage first_stage(const PointCloud& cloud, const PipelineConfig& cfg,
                       const WeightStore& weights) {
  cfg.validate();
  FirstStage fs;
  fs.map = voxelize(cloud, cfg.voxel);

  VFEConfig vfe;
  vfe.out_channels = cfg.vfe_out;
  vfe.mlp_weights = weights
                        .get("vfe.mlp.weight", {static_cast<uint32_t>(kVfeInFeatures),
                                                static_cast<uint32_t>(cfg.vfe_out)})
                        .data;
  vfe.mlp_bias = weights.get("vfe.mlp.bias", {static_cast<uint32_t>(cfg.vfe_out)}).data;
  SparseTensor x = vfe_forward(cloud, fs.map, cfg.voxel, vfe);

  const auto bottleneck = [&](const SparseTensor& bottom) {
    DenseBEV bev_in = sparse_to_bev(bottom);
    fs.f_out_bev = bev_extractor(bev_in, weights, cfg.gcp);
    const uint32_t dz = static_cast<uint32_t>(bottom.grid_dims[2]);
    const auto& proj_w = weights.get(
        "gcp.proj.weight",
        {static_cast<uint32_t>(fs.f_out_bev.channels), static_cast<uint32_t>(cfg.gcp_out) * dz});
    const auto& proj_b = weights.get("gcp.proj.bias", {static_cast<uint32_t>(cfg.gcp_out) * dz});
    return bev_to_sparse(fs.f_out_bev, bottom, proj_w.data, proj_b.data, cfg.gcp_out);
  };
  UnetOutput unet = run_unet(x, cfg.unet, weights, bottleneck);
  fs.decoder_out = std::move(unet.decoder_out);

  const uint32_t k = static_cast<uint32_t>(cfg.num_classes);
  fs.seg_logits = seg_head(
      fs.decoder_out,
      weights.get("head.seg.weight", {static_cast<uint32_t>(fs.decoder_out.channels), k}).data,
      weights.get("head.seg.bias", {k}).data, cfg.num_classes);
  fs.s1 = devoxelize(softmax_tensor(fs.seg_logits), fs.map, cfg.fallback_class);
  return fs;
}

// Axis-aligned 3D IoU (yaw ignored); the desk-scale IoU regression target.
double aligned_iou(const Box3D& a, const Box3D& b) {
  const auto overlap = [](double ca, double ea, double cb, double eb) {
    return std::max(0.0, std::min(ca + ea / 2, cb + eb / 2) - std::max(ca - ea / 2, cb - eb / 2));
  };
  const double inter = overlap(a.cx, a.l, b.cx, b.l) * overlap(a.cy, a.w, b.cy, b.w) *
                       overlap(a.cz, a.h, b.cz, b.h);
  const double va = a.l * a.w * a.h;
  const double vb = b.l * b.w * b.h;
  const double uni = va + vb - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

Box3D box_at_cell(const DetOutput& det, const BevGeometry& geom, int32_t row, int32_t col) {
  Box3D b;
  const auto reg = [&](int32_t ch) { return static_cast<double>(det.reg.at(ch, row, col)); };
  b.cx = geom.x_min + (col + reg(0)) * geom.cell_x;
  b.cy = geom.y_min + (row + reg(1)) * geom.cell_y;
  b.cz = reg(2);
  b.l = std::exp(reg(3));
  b.w = std::exp(reg(4));
  b.h = std::exp(reg(5));
  b.yaw = std::atan2(reg(6), reg(7));
  return b;
}

// Majority vote (ties toward the lowest class) over current-sweep points.
std::vector<int32_t> majority(const std::vector<std::vector<int32_t>>& counts) {
  std::vector<int32_t> out(counts.size(), -1);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    int32_t best = -1, best_count = 0;
    for (std::size_t c = 0; c < counts[i].size(); ++c) {
      if (counts[i][c] > best_count) {
        best = static_cast<int32_t>(c);
        best_count = counts[i][c];
      }
    }
    out[i] = best;
  }
  return out;
}

TaskLossReport compute_losses(const PointCloud& cloud, const PipelineConfig& cfg,
                              const FirstStage& fs, const DetOutput& det, const DenseBEV& bev_seg,
                              const BevGeometry& geom, const GroundTruth& gt) {
  if (gt.labels.semantic.size() != cloud.size()) {
    throw InputError("loss: ground-truth label count does not match the cloud");
  }
  const std::size_t k = static_cast<std::size_t>(cfg.num_classes);
  TaskLossReport rep;

  // Voxel labels: majority over current-sweep points; past sweeps carry a
  // mask bit (dt < 0) and are excluded from the loss.
  const std::size_t m = fs.map.voxel_coords.size();
  std::vector<std::vector<int32_t>> vote(m, std::vector<int32_t>(k, 0));
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const int32_t v = fs.map.point_to_voxel[i];
    if (v == kOutOfRange || cloud.points[i].dt < 0.0f) continue;
    ++vote[static_cast<std::size_t>(v)][static_cast<std::size_t>(gt.labels.semantic[i])];
  }
  const std::vector<int32_t> voxel_labels = majority(vote);

  ScoreMat vox_logits(0, k);
  std::vector<int32_t> vox_lab;
  for (std::size_t v = 0; v < m; ++v) {
    if (voxel_labels[v] < 0) continue;
    vox_lab.push_back(voxel_labels[v]);
    const float* row = fs.seg_logits.row(v);
    for (std::size_t c = 0; c < k; ++c) vox_logits.data.push_back(row[c]);
    ++vox_logits.rows;
  }
  const LossResult ce_v = cross_entropy(vox_logits, vox_lab);
  ScoreMat vox_probs(vox_logits.rows, k);
  for (std::size_t r = 0; r < vox_logits.rows; ++r) {
    const double* lr = vox_logits.row(r);
    const double mx = *std::max_element(lr, lr + k);
    double denom = 0.0;
    for (std::size_t c = 0; c < k; ++c) denom += std::exp(lr[c] - mx);
    for (std::size_t c = 0; c < k; ++c) vox_probs.row(r)[c] = std::exp(lr[c] - mx) / denom;
  }
  const LossResult lov_v = lovasz_softmax(vox_probs, vox_lab);

  // BEV cell labels: majority over the stride-8 column footprint.
  const std::size_t cells = static_cast<std::size_t>(geom.height) * geom.width;
  std::vector<std::vector<int32_t>> bev_vote(cells, std::vector<int32_t>(k, 0));
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (fs.map.point_to_voxel[i] == kOutOfRange || cloud.points[i].dt < 0.0f) continue;
    const int32_t col =
        static_cast<int32_t>(std::floor((cloud.points[i].x - geom.x_min) / geom.cell_x));
    const int32_t row =
        static_cast<int32_t>(std::floor((cloud.points[i].y - geom.y_min) / geom.cell_y));
    if (col < 0 || col >= geom.width || row < 0 || row >= geom.height) continue;
    ++bev_vote[static_cast<std::size_t>(row) * geom.width + col]
              [static_cast<std::size_t>(gt.labels.semantic[i])];
  }
  const std::vector<int32_t> bev_labels = majority(bev_vote);
  ScoreMat bev_logits(0, k);
  std::vector<int32_t> bev_lab;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    if (bev_labels[cell] < 0) continue;
    bev_lab.push_back(bev_labels[cell]);
    const int32_t row = static_cast<int32_t>(cell) / geom.width;
    const int32_t col = static_cast<int32_t>(cell) % geom.width;
    for (std::size_t c = 0; c < k; ++c) {
      bev_logits.data.push_back(bev_seg.at(static_cast<int32_t>(c), row, col));
    }
    ++bev_logits.rows;
  }
  const LossResult ce_b = cross_entropy(bev_logits, bev_lab);
  ScoreMat bev_probs(bev_logits.rows, k);
  for (std::size_t r = 0; r < bev_logits.rows; ++r) {
    const double* lr = bev_logits.row(r);
    const double mx = *std::max_element(lr, lr + k);
    double denom = 0.0;
    for (std::size_t c = 0; c < k; ++c) denom += std::exp(lr[c] - mx);
    for (std::size_t c = 0; c < k; ++c) bev_probs.row(r)[c] = std::exp(lr[c] - mx) / denom;
  }
  const LossResult lov_b = lovasz_softmax(bev_probs, bev_lab);

  // Detection targets: the IoU regression target for a box is the aligned IoU
  // between the box currently decoded at its center cell and the truth.
  const std::vector<int32_t> thing_idx = cfg.class_map().thing_index();
  std::vector<double> iou_targets(gt.boxes.size(), 0.0);
  for (std::size_t b = 0; b < gt.boxes.size(); ++b) {
    const int32_t col =
        static_cast<int32_t>(std::floor((gt.boxes[b].cx - geom.x_min) / geom.cell_x));
    const int32_t row =
        static_cast<int32_t>(std::floor((gt.boxes[b].cy - geom.y_min) / geom.cell_y));
    if (col < 0 || col >= geom.width || row < 0 || row >= geom.height) continue;
    iou_targets[b] = aligned_iou(box_at_cell(det, geom, row, col), gt.boxes[b]);
  }
  DetTargets targets = render_targets(gt.boxes, geom, thing_idx, iou_targets);

  std::vector<double> hm_pred(det.heatmap.data.begin(), det.heatmap.data.end());
  std::vector<double> hm_target(targets.heatmap.data.begin(), targets.heatmap.data.end());
  const LossResult hm = gaussian_focal(hm_pred, hm_target);

  std::vector<double> reg_pred, reg_target, iou_pred, iou_target_v;
  for (const RegTarget& rt : targets.reg_targets) {
    for (int32_t ch = 0; ch < 8; ++ch) {
      reg_pred.push_back(det.reg.at(ch, rt.row, rt.col));
      reg_target.push_back(rt.values[static_cast<std::size_t>(ch)]);
    }
    iou_pred.push_back(det.iou.at(0, rt.row, rt.col));
    iou_target_v.push_back(rt.iou_target);
  }
  const LossResult reg = l1_loss(reg_pred, reg_target);
  const LossResult iou = l1_loss(iou_pred, iou_target_v);

  rep.ce_v = ce_v.value;
  rep.lovasz_v = lov_v.value;
  rep.ce_bev = ce_b.value;
  rep.lovasz_bev = lov_b.value;
  rep.hm = hm.value;
  rep.reg = reg.value;
  rep.iou = iou.value;
  rep.l_seg = rep.ce_v + rep.lovasz_v;
  rep.l_det = group_det(rep.hm, rep.reg, rep.iou);
  rep.l_bev = rep.ce_bev + rep.lovasz_bev;
  if (cfg.per_loss_uncertainty) {
    const PerLossUncertaintyResult r = per_loss_uncertainty(
        {rep.ce_v, rep.lovasz_v, rep.ce_bev, rep.lovasz_bev, rep.hm, rep.reg, rep.iou},
        std::vector<double>(7, 0.0));
    rep.total = r.total;
  } else {
    const UncertaintyResult r =
        total_uncertainty_loss(rep.l_seg, rep.l_det, rep.l_bev, UncertaintyParams{});
    rep.total = r.total;
    rep.d_s_seg = r.d_s_seg;
    rep.d_s_det = r.d_s_det;
    rep.d_s_bev = r.d_s_bev;
  }
  return rep;
}

PipelineResult finish_pipeline(const PointCloud& cloud, const PipelineConfig& cfg,
                               const WeightStore& weights, FirstStage fs, const GroundTruth* gt) {
  PipelineResult res;
  const BevGeometry geom = bev_geometry(cfg);
  const DetOutput det = det_head(fs.f_out_bev, weights, cfg.num_thing());
  res.boxes = decode_boxes(det, geom, cfg.thing_classes, cfg.max_boxes, cfg.score_thresh);
  res.index = assign_points(cloud, res.boxes);
  const Stage2Scores s2 = second_stage_forward(cloud, res.boxes, res.index, fs.map, fs.decoder_out,
                                               fs.f_out_bev, geom, weights, cfg.num_thing());
  res.s2nd = fuse_s2nd(s2.s_point, s2.s_box, res.index);
  res.s_final = fuse_final(fs.s1, res.s2nd, res.index, cfg.class_map());
  res.panoptic = panoptic_assign(argmax_labels(res.s_final), res.boxes, res.index);

  if (gt != nullptr) {
    const DenseBEV bev_seg = bev_seg_head(fs.f_out_bev, weights, cfg.num_classes);
    res.loss = compute_losses(cloud, cfg, fs, det, bev_seg, geom, *gt);
    res.has_loss = true;
  }

  res.map = std::move(fs.map);
  res.decoder_out = std::move(fs.decoder_out);
  res.f_out_bev = std::move(fs.f_out_bev);
  res.s1 = std::move(fs.s1);
  return res;
}

}  // namespace

PipelineResult run_pipeline(const PointCloud& cloud, const PipelineConfig& cfg,
                            const WeightStore& weights, const GroundTruth* gt) {
  return finish_pipeline(cloud, cfg, weights, first_stage(cloud, cfg, weights), gt);
}

ScoreMat first_stage_scores(const PointCloud& cloud, const PipelineConfig& cfg,
                            const WeightStore& weights) {
  return first_stage(cloud, cfg, weights).s1;
}

PipelineResult run_pipeline_tta(const PointCloud& cloud, const PipelineConfig& cfg,
                                const WeightStore& weights,
                                const std::vector<PointTransform>& transforms,
                                const GroundTruth* gt) {
  FirstStage fs = first_stage(cloud, cfg, weights);
  fs.s1 = tta_infer(
      cloud, [&](const PointCloud& c) { return first_stage_scores(c, cfg, weights); }, transforms);
  return finish_pipeline(cloud, cfg, weights, std::move(fs), gt);
}

}  // namespace voxmt
