#include "voxmt/selftest.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <set>
#include <vector>

#include "voxmt/dense2d.hpp"
#include "voxmt/heads.hpp"
#include "voxmt/kernels.hpp"
#include "voxmt/losses.hpp"
#include "voxmt/metrics.hpp"
#include "voxmt/refine.hpp"
#include "voxmt/sparse_conv.hpp"
#include "voxmt/ttaens.hpp"

namespace voxmt {

namespace {

float uf(std::mt19937_64& g) {
  return static_cast<float>((g() >> 11) * 0x1.0p-53 * 2.0 - 1.0);
}

SparseTensor random_sparse(std::mt19937_64& g, std::array<int32_t, 3> dims, int32_t channels,
                           std::size_t n_active) {
  std::set<Coord, bool (*)(const Coord&, const Coord&)> sites(coord_less);
  while (sites.size() < n_active) {
    sites.insert({static_cast<int32_t>(g() % static_cast<uint64_t>(dims[0])),
                  static_cast<int32_t>(g() % static_cast<uint64_t>(dims[1])),
                  static_cast<int32_t>(g() % static_cast<uint64_t>(dims[2]))});
  }
  SparseTensor t;
  t.coords.assign(sites.begin(), sites.end());
  t.channels = channels;
  t.grid_dims = dims;
  t.features.resize(t.size() * static_cast<std::size_t>(channels));
  for (float& v : t.features) v = uf(g);
  return t;
}

DenseVolume densify(const SparseTensor& t) {
  DenseVolume v = make_volume(t.channels, t.grid_dims);
  for (std::size_t r = 0; r < t.size(); ++r) {
    for (int32_t c = 0; c < t.channels; ++c) {
      v.at(c, t.coords[r][0], t.coords[r][1], t.coords[r][2]) = t.row(r)[c];
    }
  }
  return v;
}

bool check_conv_vs_oracle(std::mt19937_64& g, ConvMode mode, int32_t stride) {
  const std::array<int32_t, 3> dims{12, 10, 8};
  const int32_t cin = 3, cout = 4;
  SparseTensor x = random_sparse(g, dims, cin, 40);
  ConvSpec spec;
  spec.stride = stride;
  spec.in_channels = cin;
  spec.out_channels = cout;
  spec.mode = mode;
  spec.weights.resize(27ul * cin * cout);
  for (float& w : spec.weights) w = uf(g);
  const Rulebook rb = build_rulebook(x, spec);
  const SparseTensor y = sparse_conv(x, spec, rb);
  const DenseVolume oracle =
      dense_conv3d_oracle(densify(x), spec.kernel, spec.weights, cout, stride);

  // Sparse values must match the dense oracle at active sites...
  for (std::size_t r = 0; r < y.size(); ++r) {
    for (int32_t c = 0; c < cout; ++c) {
      const double got = y.row(r)[c];
      const double want = oracle.at(c, y.coords[r][0], y.coords[r][1], y.coords[r][2]);
      if (std::abs(got - want) > 1e-5 * std::max(1.0, std::abs(want))) return false;
    }
  }
  if (mode == ConvMode::kSubmanifold) return true;

  // ... and the oracle must be zero everywhere the sparse output is inactive.
  CoordMap active(y.size());
  for (std::size_t r = 0; r < y.size(); ++r) {
    active.insert(pack_coord(y.coords[r], y.grid_dims), static_cast<int32_t>(r));
  }
  for (int32_t z = 0; z < y.grid_dims[2]; ++z) {
    for (int32_t yy = 0; yy < y.grid_dims[1]; ++yy) {
      for (int32_t xx = 0; xx < y.grid_dims[0]; ++xx) {
        if (active.find(pack_coord({xx, yy, z}, y.grid_dims)) >= 0) continue;
        for (int32_t c = 0; c < cout; ++c) {
          if (oracle.at(c, xx, yy, z) != 0.0f) return false;
        }
      }
    }
  }
  return true;
}

bool check_kernels(std::mt19937_64& g) {
#if defined(VOXMT_HAVE_AVX2_BUILD)
  if (!__builtin_cpu_supports("avx2")) return true;
  for (std::size_t n : {1ul, 7ul, 8ul, 17ul, 64ul, 100ul}) {
    std::vector<float> x(n), y0(n), y1(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = uf(g);
      y0[i] = uf(g);
    }
    y1 = y0;
    kernels::scalar::ops.axpy(y0.data(), x.data(), 0.37f, n);
    kernels::avx2::ops.axpy(y1.data(), x.data(), 0.37f, n);
    kernels::scalar::ops.relu(y0.data(), n);
    kernels::avx2::ops.relu(y1.data(), n);
    kernels::scalar::ops.emax(y0.data(), x.data(), n);
    kernels::avx2::ops.emax(y1.data(), x.data(), n);
    if (std::memcmp(y0.data(), y1.data(), n * sizeof(float)) != 0) return false;
  }
#endif
  return true;
}

bool check_fusion(std::mt19937_64& g) {
  const int32_t kt = 3;
  std::vector<double> s_point(50);
  ScoreMat s_box(10, kt + 1);
  PointBoxIndex index;
  for (double& v : s_point) v = (g() >> 11) * 0x1.0p-53;
  for (std::size_t b = 0; b < s_box.rows; ++b) {
    double sum = 0.0;
    for (std::size_t c = 0; c <= static_cast<std::size_t>(kt); ++c) {
      s_box.row(b)[c] = 0.05 + (g() >> 11) * 0x1.0p-53;
      sum += s_box.row(b)[c];
    }
    for (std::size_t c = 0; c <= static_cast<std::size_t>(kt); ++c) s_box.row(b)[c] /= sum;
  }
  for (std::size_t i = 0; i < s_point.size(); ++i) {
    index.ind.push_back(static_cast<int32_t>(g() % 11) - 1);  // includes kNotInBox
  }
  const ScoreMat s2 = fuse_s2nd(s_point, s_box, index);
  for (std::size_t i = 0; i < s2.rows; ++i) {
    if (index.ind[i] == kNotInBox) continue;
    double sum = 0.0;
    for (std::size_t c = 0; c < s2.cols; ++c) sum += s2.row(i)[c];
    if (std::abs(sum - 1.0) > 1e-9) return false;
  }
  return true;
}

bool check_tta() {
  const std::vector<PointTransform> set = make_tta_set();
  if (set.size() != 20) return false;
  for (const PointTransform& t : set) {
    const PointTransform inv = t.inverse();
    const std::array<double, 3> p{1.25, -2.5, 0.75};
    const std::array<double, 3> q = inv.apply(t.apply(p));
    for (int a = 0; a < 3; ++a) {
      if (std::abs(q[a] - p[a]) > 1e-9) return false;
    }
  }
  return true;
}

bool check_det_round_trip() {
  BevGeometry geom;
  geom.x_min = -16.0;
  geom.y_min = -16.0;
  geom.cell_x = 1.0;
  geom.cell_y = 1.0;
  geom.height = 32;
  geom.width = 32;
  Box3D box;
  box.cx = 3.3;
  box.cy = -4.7;
  box.cz = 0.8;
  box.l = 4.2;
  box.w = 1.9;
  box.h = 1.6;
  box.yaw = 0.6;
  box.class_id = 0;
  const DetTargets t = render_targets({box}, geom, {0});
  DetOutput det;
  det.heatmap = t.heatmap;
  det.reg = make_bev(8, geom.height, geom.width);
  det.iou = make_bev(1, geom.height, geom.width);
  const RegTarget& rt = t.reg_targets[0];
  for (int32_t ch = 0; ch < 8; ++ch) {
    det.reg.at(ch, rt.row, rt.col) = static_cast<float>(rt.values[ch]);
  }
  det.iou.at(0, rt.row, rt.col) = 1.0f;
  const std::vector<Box3D> decoded = decode_boxes(det, geom, {0}, 10, 0.1);
  if (decoded.size() != 1) return false;
  const Box3D& d = decoded[0];
  return std::abs(d.cx - box.cx) <= geom.cell_x && std::abs(d.cy - box.cy) <= geom.cell_y &&
         std::abs(d.yaw - box.yaw) < 1e-6;
}

bool check_pq(std::mt19937_64& g) {
  PanopticLabel pred, gt;
  for (int i = 0; i < 400; ++i) {
    pred.semantic.push_back(static_cast<int32_t>(g() % 4));
    pred.instance.push_back(pred.semantic.back() >= 2 ? static_cast<int32_t>(1 + g() % 3) : 0);
    gt.semantic.push_back(static_cast<int32_t>(g() % 4));
    gt.instance.push_back(gt.semantic.back() >= 2 ? static_cast<int32_t>(1 + g() % 3) : 0);
  }
  const PqReport r = pq(pred, gt, {2, 3}, {0, 1});
  if (std::abs(r.pq - r.sq * r.rq) > 1e-12) return false;
  const PqReport perfect = pq(gt, gt, {2, 3}, {0, 1});
  return std::abs(perfect.pq - 1.0) < 1e-12;
}

bool check_losses() {
  ScoreMat logits(3, 4);  // uniform rows: CE = ln 4
  const LossResult ce = cross_entropy(logits, {0, 1, 2});
  return std::abs(ce.value - std::log(4.0)) < 1e-12;
}

}  // namespace

bool run_selftest(std::ostream& os) {
  std::mt19937_64 g(42);
  bool ok = true;
  const auto report = [&](const char* name, bool pass) {
    os << (pass ? "PASS" : "FAIL") << " " << name << "\n";
    ok = ok && pass;
  };
  report("kernel variants bitwise equal", check_kernels(g));
  report("submanifold conv matches dense oracle", check_conv_vs_oracle(g, ConvMode::kSubmanifold, 1));
  report("standard conv matches dense oracle", check_conv_vs_oracle(g, ConvMode::kStrided, 1));
  report("strided conv matches dense oracle", check_conv_vs_oracle(g, ConvMode::kStrided, 2));
  report("second-stage fusion conserves mass", check_fusion(g));
  report("tta transforms invert exactly", check_tta());
  report("detection render/decode round trip", check_det_round_trip());
  report("pq identity and perfect score", check_pq(g));
  report("uniform cross-entropy is ln K", check_losses());
  return ok;
}

}  // namespace voxmt
