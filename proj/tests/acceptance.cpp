// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned here and intentionally not configurable.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <set>
#include <vector>

#include "test_util.hpp"
#include "voxmt/config.hpp"
#include "voxmt/dense2d.hpp"
#include "voxmt/gcp.hpp"
#include "voxmt/heads.hpp"
#include "voxmt/losses.hpp"
#include "voxmt/metrics.hpp"
#include "voxmt/pipeline.hpp"
#include "voxmt/refine.hpp"
#include "voxmt/sparse_conv.hpp"
#include "voxmt/ttaens.hpp"

using namespace voxmt;

namespace {

int g_failures = 0;

void report(int num, const char* name, bool pass) {
  std::printf("%s  criterion %2d: %s\n", pass ? "PASS" : "FAIL", num, name);
  if (!pass) ++g_failures;
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// --- 1: sparse conv vs dense oracle -----------------------------------------

bool criterion_sparse_oracle(double* elapsed) {
  std::mt19937_64 g(1001);
  const double t0 = now_seconds();
  for (int trial = 0; trial < 100; ++trial) {
    const std::array<int32_t, 3> dims{static_cast<int32_t>(4 + g() % 29),
                                      static_cast<int32_t>(4 + g() % 29),
                                      static_cast<int32_t>(4 + g() % 29)};
    const std::size_t max_sites =
        static_cast<std::size_t>(dims[0]) * dims[1] * dims[2] / 2;
    const std::size_t n_active = 1 + g() % std::min<std::size_t>(500, max_sites);
    ConvSpec spec;
    const int32_t k = (g() % 2) ? 3 : 1;
    spec.kernel = {k, k, k};
    spec.in_channels = static_cast<int32_t>(1 + g() % 4);
    spec.out_channels = static_cast<int32_t>(1 + g() % 4);
    spec.mode = (trial % 2) ? ConvMode::kStrided : ConvMode::kSubmanifold;
    spec.stride = (spec.mode == ConvMode::kStrided && trial % 4 < 2) ? 2 : 1;
    spec.weights.resize(static_cast<std::size_t>(k) * k * k * spec.in_channels *
                        spec.out_channels);
    for (float& w : spec.weights) w = testutil::ufloat(g);

    const SparseTensor x = testutil::random_sparse(g, dims, spec.in_channels, n_active);
    const SparseTensor y = sparse_conv(x, spec, build_rulebook(x, spec));
    const DenseVolume oracle = dense_conv3d_oracle(testutil::densify(x), spec.kernel,
                                                   spec.weights, spec.out_channels, spec.stride);
    for (std::size_t r = 0; r < y.size(); ++r) {
      for (int32_t c = 0; c < spec.out_channels; ++c) {
        const double want = oracle.at(c, y.coords[r][0], y.coords[r][1], y.coords[r][2]);
        const double got = y.row(r)[c];
        if (std::abs(got - want) > 1e-5 * std::max(1.0, std::abs(want))) return false;
      }
    }
  }
  *elapsed = now_seconds() - t0;
  return *elapsed < 60.0;
}

// --- 2: submanifold preservation, inverse restoration -----------------------

bool criterion_active_sets() {
  std::mt19937_64 g(1002);
  for (int trial = 0; trial < 100; ++trial) {
    const std::array<int32_t, 3> dims{static_cast<int32_t>(4 + g() % 20),
                                      static_cast<int32_t>(4 + g() % 20),
                                      static_cast<int32_t>(4 + g() % 20)};
    const SparseTensor x = testutil::random_sparse(g, dims, 2, 1 + g() % 80);

    ConvSpec sub;
    sub.in_channels = 2;
    sub.out_channels = 3;
    sub.mode = ConvMode::kSubmanifold;
    sub.weights.resize(27 * 2 * 3);
    for (float& w : sub.weights) w = testutil::ufloat(g);
    const SparseTensor y = sparse_conv(x, sub, build_rulebook(x, sub));
    if (y.coords != x.coords) return false;

    ConvSpec down;
    down.in_channels = 2;
    down.out_channels = 2;
    down.stride = 2;
    down.mode = ConvMode::kStrided;
    down.weights.resize(27 * 2 * 2);
    for (float& w : down.weights) w = testutil::ufloat(g);
    const Rulebook rb = build_rulebook(x, down);
    const SparseTensor z = sparse_conv(x, down, rb);

    ConvSpec up;
    up.in_channels = 2;
    up.out_channels = 2;
    up.stride = 2;
    up.mode = ConvMode::kInverse;
    up.weights.resize(27 * 2 * 2);
    for (float& w : up.weights) w = testutil::ufloat(g);
    const SparseTensor back = inverse_conv(z, up, rb);
    if (back.coords != x.coords) return false;
  }
  return true;
}

// --- 3: GCP round trip + Waymo dims ------------------------------------------

bool criterion_gcp() {
  std::mt19937_64 g(1003);
  for (int trial = 0; trial < 50; ++trial) {
    const std::array<int32_t, 3> dims{static_cast<int32_t>(2 + g() % 10),
                                      static_cast<int32_t>(2 + g() % 10),
                                      static_cast<int32_t>(1 + g() % 6)};
    const int32_t cp = static_cast<int32_t>(1 + g() % 8);
    SparseTensor x = testutil::random_sparse(g, dims, cp, 1 + g() % 40);
    x.stride = 8;

    const std::size_t n = static_cast<std::size_t>(cp) * dims[2];
    std::vector<float> identity(n * n, 0.0f);
    for (std::size_t i = 0; i < n; ++i) identity[i * n + i] = 1.0f;

    const DenseBEV bev = sparse_to_bev(x);
    const SparseTensor back = bev_to_sparse(bev, x, identity, {}, cp);
    if (back.coords != x.coords) return false;
    if (std::memcmp(back.features.data(), x.features.data(),
                    x.features.size() * sizeof(float)) != 0) {
      return false;
    }
  }
  const PipelineConfig waymo = profile_config("waymo");
  const auto dims = waymo.voxel.grid_dims();
  SparseTensor bottom;
  bottom.channels = waymo.unet.encoder_widths[3];
  bottom.grid_dims = {dims[0] / 8, dims[1] / 8, dims[2] / 8};
  const DenseBEV bev = sparse_to_bev(bottom);
  return bev.height == 188 && bev.width == 188 && bev.channels == 1280;
}

// --- 4: gradient suite --------------------------------------------------------

bool fd_matches(std::vector<double> x, const std::vector<double>& grad,
                const std::function<double(const std::vector<double>&)>& f) {
  const double h = 1e-4;
  if (grad.size() != x.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    const double fd = (up - down) / (2.0 * h);
    if (std::abs(grad[i] - fd) > 1e-4 * std::max(1.0, std::abs(fd))) return false;
  }
  return true;
}

ScoreMat as_mat(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
  ScoreMat m(rows, cols);
  m.data = v;
  return m;
}

bool criterion_gradients() {
  std::mt19937_64 g(1004);
  for (int trial = 0; trial < 20; ++trial) {
    // Cross-entropy.
    std::vector<double> logits(12);
    for (double& v : logits) v = testutil::urand(g) * 4.0 - 2.0;
    std::vector<int32_t> labels(4);
    for (int32_t& l : labels) l = static_cast<int32_t>(g() % 3);
    if (!fd_matches(logits, cross_entropy(as_mat(logits, 4, 3), labels).grad,
                    [&](const std::vector<double>& x) {
                      return cross_entropy(as_mat(x, 4, 3), labels).value;
                    })) {
      std::fprintf(stderr, "criterion 4: cross_entropy FD mismatch (trial %d)\n", trial);
      return false;
    }

    // Gaussian focal (off clamp).
    std::vector<double> pred(12), target(12);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      pred[i] = 0.05 + 0.9 * testutil::urand(g);
      target[i] = (i % 4 == 0) ? 1.0 : 0.9 * testutil::urand(g);
    }
    if (!fd_matches(pred, gaussian_focal(pred, target).grad,
                    [&](const std::vector<double>& x) {
                      return gaussian_focal(x, target).value;
                    })) {
      std::fprintf(stderr, "criterion 4: gaussian_focal FD mismatch (trial %d)\n", trial);
      return false;
    }

    // L1, off kinks: keep |pred - target| bounded away from 0.
    std::vector<double> p2(8), t2(8);
    for (std::size_t i = 0; i < p2.size(); ++i) {
      t2[i] = testutil::urand(g) * 2.0 - 1.0;
      const double gap = 0.01 + testutil::urand(g);
      p2[i] = t2[i] + ((g() % 2) ? gap : -gap);
    }
    if (!fd_matches(p2, l1_loss(p2, t2).grad, [&](const std::vector<double>& x) {
          return l1_loss(x, t2).value;
        })) {
      std::fprintf(stderr, "criterion 4: l1 FD mismatch (trial %d)\n", trial);
      return false;
    }

    // Lovasz, off sort ties: distinct lattice probabilities scaled so that no
    // error value p can tie with a reflected value 1 - p within the FD step.
    std::vector<double> probs(15);
    for (std::size_t i = 0; i < probs.size(); ++i) {
      probs[i] = 0.05 + 0.8 * (static_cast<double>(i) + 0.5) / probs.size() +
                 0.001 * testutil::urand(g);
    }
    std::shuffle(probs.begin(), probs.end(), g);
    std::vector<int32_t> lb(5);
    for (int32_t& l : lb) l = static_cast<int32_t>(g() % 3);
    if (!fd_matches(probs, lovasz_softmax(as_mat(probs, 5, 3), lb).grad,
                    [&](const std::vector<double>& x) {
                      return lovasz_softmax(as_mat(x, 5, 3), lb).value;
                    })) {
      std::fprintf(stderr, "criterion 4: lovasz FD mismatch (trial %d)\n", trial);
      return false;
    }

    // Uncertainty combination.
    const double ls = 0.1 + testutil::urand(g) * 4.0;
    const double ld = 0.1 + testutil::urand(g) * 4.0;
    const double lbv = 0.1 + testutil::urand(g) * 4.0;
    UncertaintyParams params;
    params.s_seg = testutil::urand(g) * 2.0 - 1.0;
    params.s_det = testutil::urand(g) * 2.0 - 1.0;
    params.s_bev = testutil::urand(g) * 2.0 - 1.0;
    const UncertaintyResult u = total_uncertainty_loss(ls, ld, lbv, params);
    if (!fd_matches({params.s_seg, params.s_det, params.s_bev},
                    {u.d_s_seg, u.d_s_det, u.d_s_bev}, [&](const std::vector<double>& s) {
                      UncertaintyParams q;
                      q.s_seg = s[0];
                      q.s_det = s[1];
                      q.s_bev = s[2];
                      return total_uncertainty_loss(ls, ld, lbv, q).total;
                    })) {
      std::fprintf(stderr, "criterion 4: uncertainty FD mismatch (trial %d)\n", trial);
      return false;
    }
  }

  // uncertainty-weight stationarity: s* = ln L to 1e-8.
  for (double l : {0.5, 1.0, 4.0}) {
    UncertaintyParams params;
    params.s_seg = std::log(l);
    if (std::abs(total_uncertainty_loss(l, 1.0, 1.0, params).d_s_seg) > 1e-8) return false;
  }
  return true;
}

// --- 5: second-stage fusion conservation, final fusion limits -------------------------------------

bool criterion_fusion() {
  std::mt19937_64 g(1005);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t kt = 1 + g() % 6;
    ScoreMat s_box(1, kt + 1);
    double sum = 0.0;
    for (std::size_t c = 0; c <= kt; ++c) {
      s_box.row(0)[c] = 0.001 + testutil::urand(g);
      sum += s_box.row(0)[c];
    }
    for (std::size_t c = 0; c <= kt; ++c) s_box.row(0)[c] /= sum;
    PointBoxIndex idx;
    idx.ind = {0};
    const ScoreMat s2 = fuse_s2nd({testutil::urand(g)}, s_box, idx);
    double row_sum = 0.0;
    for (std::size_t c = 0; c < s2.cols; ++c) row_sum += s2.row(0)[c];
    if (std::abs(row_sum - 1.0) > 1e-9) return false;
  }

  // Final fusion limits must be exact (bitwise).
  ClassMap classes;
  classes.num_classes = 5;
  classes.thing_classes = {1, 3};
  ScoreMat s1(2, 5);
  for (int trial = 0; trial < 100; ++trial) {
    for (double& v : s1.data) v = testutil::urand(g);
    ScoreMat s2(2, 3);
    s2.row(0)[2] = 1.0;  // S_point -> 0 limit: one-hot at the empty slot
    PointBoxIndex idx;
    idx.ind = {0, kNotInBox};
    const ScoreMat out = fuse_final(s1, s2, idx, classes);
    if (std::memcmp(out.data.data(), s1.data.data(), s1.data.size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

// --- 6: render -> decode round trip -------------------------------------------

bool criterion_detection() {
  BevGeometry geom;
  geom.x_min = -20.0;
  geom.y_min = -20.0;
  geom.cell_x = 0.8;
  geom.cell_y = 0.8;
  geom.height = 50;
  geom.width = 50;
  std::mt19937_64 g(1006);
  for (int trial = 0; trial < 50; ++trial) {
    Box3D box;
    box.cx = testutil::urand(g) * 30.0 - 15.0;
    box.cy = testutil::urand(g) * 30.0 - 15.0;
    box.cz = testutil::urand(g) * 2.0 - 1.0;
    box.l = 2.0 + testutil::urand(g) * 4.0;
    box.w = 1.0 + testutil::urand(g) * 2.0;
    box.h = 1.0 + testutil::urand(g);
    box.yaw = testutil::urand(g) * 6.2 - 3.1;
    box.class_id = 0;
    const DetTargets t = render_targets({box}, geom, {0});
    if (t.reg_targets.size() != 1) return false;
    const RegTarget& rt = t.reg_targets[0];

    DetOutput det;
    det.heatmap = t.heatmap;
    det.reg = make_bev(8, geom.height, geom.width);
    det.iou = make_bev(1, geom.height, geom.width);
    for (int32_t ch = 0; ch < 8; ++ch) {
      det.reg.at(ch, rt.row, rt.col) = static_cast<float>(rt.values[ch]);
    }
    det.iou.at(0, rt.row, rt.col) = 1.0f;

    const std::vector<Box3D> out = decode_boxes(det, geom, {0}, 5, 0.5);
    if (out.size() != 1) return false;
    if (std::abs(out[0].cx - box.cx) > geom.cell_x) return false;
    if (std::abs(out[0].cy - box.cy) > geom.cell_y) return false;
    if (std::abs(std::remainder(out[0].yaw - box.yaw, 2.0 * M_PI)) > 1e-6) return false;
  }
  return true;
}

// --- 7: Lovasz brute force on all binary labelings of <= 8 elements -----------

bool criterion_lovasz() {
  for (std::size_t n = 1; n <= 8; ++n) {
    for (uint32_t gt_bits = 0; gt_bits < (1u << n); ++gt_bits) {
      for (uint32_t pr_bits = 0; pr_bits < (1u << n); ++pr_bits) {
        std::vector<int32_t> gt(n);
        ScoreMat probs(n, 2);
        for (std::size_t i = 0; i < n; ++i) {
          gt[i] = (gt_bits >> i) & 1;
          probs.row(i)[(pr_bits >> i) & 1] = 1.0;
        }
        double want = 0.0;
        int present = 0;
        for (int32_t c = 0; c < 2; ++c) {
          int inter = 0, uni = 0, in_gt = 0;
          for (std::size_t i = 0; i < n; ++i) {
            const bool p = ((pr_bits >> i) & 1) == static_cast<uint32_t>(c);
            const bool t = gt[i] == c;
            inter += p && t;
            uni += p || t;
            in_gt += t;
          }
          if (!in_gt) continue;
          ++present;
          want += 1.0 - static_cast<double>(inter) / uni;
        }
        if (present) want /= present;
        if (std::abs(lovasz_softmax(probs, gt).value - want) > 1e-9) return false;
      }
    }
  }
  return true;
}

// --- 8: metric identities ------------------------------------------------------

bool criterion_metrics() {
  std::mt19937_64 g(1008);
  for (int trial = 0; trial < 100; ++trial) {
    PanopticLabel pred, gt;
    const int n = 50 + static_cast<int>(g() % 300);
    for (int i = 0; i < n; ++i) {
      const int32_t ps = static_cast<int32_t>(g() % 5);
      const int32_t gs = static_cast<int32_t>(g() % 5);
      pred.semantic.push_back(ps);
      pred.instance.push_back(ps >= 3 ? static_cast<int32_t>(1 + g() % 5) : 0);
      gt.semantic.push_back(gs);
      gt.instance.push_back(gs >= 3 ? static_cast<int32_t>(1 + g() % 5) : 0);
    }
    const PqReport r = pq(pred, gt, {3, 4}, {0, 1, 2});
    if (std::abs(r.pq - r.sq * r.rq) > 1e-12) return false;
    if (r.pq < 0.0 || r.pq > 1.0) return false;
  }

  PanopticLabel perfect;
  perfect.semantic = {0, 1, 3, 3, 4, 2, 0};
  perfect.instance = {0, 0, 1, 1, 2, 0, 0};
  if (miou(perfect.semantic, perfect.semantic, 5).mean != 1.0) return false;
  const PqReport p = pq(perfect, perfect, {3, 4}, {0, 1, 2});
  return p.pq == 1.0;
}

// --- 9: end-to-end toy run ------------------------------------------------------

bool criterion_end_to_end(double* elapsed) {
  const PipelineConfig cfg = profile_config("toy");
  const SynthScene scene = synth_scene(2024, 6, 20000, cfg);
  const WeightStore ws = init_weights(cfg, 2024);

  const double t0 = now_seconds();
  const PipelineResult r1 = run_pipeline(scene.cloud, cfg, ws);
  *elapsed = now_seconds() - t0;
  const PipelineResult r2 = run_pipeline(scene.cloud, cfg, ws);

  if (r1.s_final.rows != scene.cloud.size()) return false;
  if (r1.panoptic.semantic.size() != scene.cloud.size()) return false;
  if (std::memcmp(r1.s_final.data.data(), r2.s_final.data.data(),
                  r1.s_final.data.size() * sizeof(double)) != 0) {
    return false;
  }
  if (r1.panoptic.semantic != r2.panoptic.semantic) return false;
  if (r1.panoptic.instance != r2.panoptic.instance) return false;
  for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
    const int32_t sem = r1.panoptic.semantic[i];
    const int32_t inst = r1.panoptic.instance[i];
    if (sem < 0 || sem >= cfg.num_classes) return false;
    if (inst < 0 || inst > static_cast<int32_t>(r1.boxes.size())) return false;
    if (inst > 0 && sem != r1.boxes[inst - 1].class_id) return false;
  }

  // Zero-box limit.
  PipelineConfig gated = cfg;
  gated.score_thresh = 2.0;
  const PipelineResult r3 = run_pipeline(scene.cloud, gated, ws);
  if (!r3.boxes.empty()) return false;
  if (std::memcmp(r3.s_final.data.data(), r3.s1.data.data(),
                  r3.s1.data.size() * sizeof(double)) != 0) {
    return false;
  }
  return *elapsed <= 10.0;
}

// --- 10: TTA set -----------------------------------------------------------------

bool criterion_tta() {
  const std::vector<PointTransform> set = make_tta_set();
  if (set.size() != 20) return false;
  std::mt19937_64 g(1010);
  for (const PointTransform& t : set) {
    const PointTransform inv = t.inverse();
    for (int trial = 0; trial < 25; ++trial) {
      const std::array<double, 3> p{testutil::urand(g) * 100.0 - 50.0,
                                    testutil::urand(g) * 100.0 - 50.0,
                                    testutil::urand(g) * 10.0 - 5.0};
      const std::array<double, 3> q = inv.apply(t.apply(p));
      for (int a = 0; a < 3; ++a) {
        if (std::abs(q[a] - p[a]) > 1e-9) return false;
      }
    }
  }

  PointCloud cloud;
  for (int i = 0; i < 40; ++i) {
    cloud.points.push_back({static_cast<float>(i * 0.3), static_cast<float>(20 - i), 0.4f, 0, 0});
  }
  const ScoreMat out = tta_infer(
      cloud,
      [](const PointCloud& c) {
        ScoreMat m(c.size(), 4);
        for (std::size_t i = 0; i < m.rows; ++i) {
          m.row(i)[0] = 0.4;
          m.row(i)[1] = 0.3;
          m.row(i)[2] = 0.2;
          m.row(i)[3] = 0.1;
        }
        return m;
      },
      set);
  for (std::size_t i = 0; i < out.rows; ++i) {
    if (std::abs(out.row(i)[0] - 0.4) > 1e-12) return false;
    if (std::abs(out.row(i)[3] - 0.1) > 1e-12) return false;
  }
  return true;
}

}  // namespace

int main() {
  double t_sparse = 0.0, t_e2e = 0.0;
  report(1, "sparse conv matches dense oracle (100 cases, rel 1e-5, <60s)",
         criterion_sparse_oracle(&t_sparse));
  report(2, "submanifold preservation + inverse active-set restoration (100 cases)",
         criterion_active_sets());
  report(3, "GCP identity round trip bitwise (50 cases) + Waymo BEV 188x188x1280",
         criterion_gcp());
  report(4, "gradient suite vs central differences + uncertainty-weight stationarity",
         criterion_gradients());
  report(5, "second-stage fusion conservation (1000 draws, 1e-9) + exact final-fusion limits",
         criterion_fusion());
  report(6, "render->decode round trip (50 scenes, one cell / 1e-6 rad)",
         criterion_detection());
  report(7, "Lovasz equals 1 - Jaccard on all binary labelings of <= 8 elements",
         criterion_lovasz());
  report(8, "PQ = SQ*RQ identity (100 pairs) + perfect-prediction scores",
         criterion_metrics());
  report(9, "toy end-to-end: total, bitwise deterministic, <= 10 s, zero-box limit",
         criterion_end_to_end(&t_e2e));
  report(10, "TTA 20-transform set: exact inverses + constant-score invariance",
         criterion_tta());
  std::printf("timings: sparse oracle %.2fs, end-to-end %.2fs\n", t_sparse, t_e2e);
  std::printf("%s\n", g_failures == 0 ? "ALL CRITERIA PASSED" : "ACCEPTANCE FAILED");
  return g_failures == 0 ? 0 : 1;
}
