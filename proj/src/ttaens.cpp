#include "voxmt/ttaens.hpp"

#include <cmath>
#include <numbers>

#include "voxmt/errors.hpp"

namespace voxmt {

namespace {

std::array<double, 9> matmul3(const std::array<double, 9>& a, const std::array<double, 9>& b) {
  std::array<double, 9> c{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) c[i * 3 + j] += a[i * 3 + k] * b[k * 3 + j];
    }
  }
  return c;
}

std::array<double, 9> transpose3(const std::array<double, 9>& a) {
  return {a[0], a[3], a[6], a[1], a[4], a[7], a[2], a[5], a[8]};
}

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

std::array<double, 3> PointTransform::apply(const std::array<double, 3>& p) const {
  std::array<double, 3> q{};
  for (int i = 0; i < 3; ++i) {
    q[i] = linear[i * 3] * p[0] + linear[i * 3 + 1] * p[1] + linear[i * 3 + 2] * p[2] +
           translation[i];
  }
  return q;
}

PointTransform PointTransform::inverse() const {
  // A is an orthogonal matrix times a uniform scale s: A^-1 = A^T / s^2.
  double s2 = linear[0] * linear[0] + linear[3] * linear[3] + linear[6] * linear[6];
  PointTransform inv;
  inv.name = name + "^-1";
  const std::array<double, 9> at = transpose3(linear);
  for (int i = 0; i < 9; ++i) inv.linear[i] = at[i] / s2;
  for (int i = 0; i < 3; ++i) {
    inv.translation[i] = -(inv.linear[i * 3] * translation[0] +
                           inv.linear[i * 3 + 1] * translation[1] +
                           inv.linear[i * 3 + 2] * translation[2]);
  }
  return inv;
}

PointCloud PointTransform::apply(const PointCloud& cloud) const {
  PointCloud out = cloud;
  for (Point& p : out.points) {
    const std::array<double, 3> q = apply({p.x, p.y, p.z});
    p.x = static_cast<float>(q[0]);
    p.y = static_cast<float>(q[1]);
    p.z = static_cast<float>(q[2]);
  }
  return out;
}

PointTransform compose(const PointTransform& outer, const PointTransform& inner) {
  PointTransform c;
  c.name = outer.name + "*" + inner.name;
  c.linear = matmul3(outer.linear, inner.linear);
  const std::array<double, 3> t = outer.apply(inner.translation);
  c.translation = t;
  return c;
}

PointTransform make_transform(double scale, double yaw, double pitch, double roll, double tz,
                              bool flip_x, bool flip_y) {
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const double cr = std::cos(roll), sr = std::sin(roll);
  const std::array<double, 9> rz{cy, -sy, 0, sy, cy, 0, 0, 0, 1};
  const std::array<double, 9> ry{cp, 0, sp, 0, 1, 0, -sp, 0, cp};
  const std::array<double, 9> rx{1, 0, 0, 0, cr, -sr, 0, sr, cr};
  std::array<double, 9> a = matmul3(matmul3(rz, ry), rx);
  for (double& v : a) v *= scale;
  if (flip_x) {
    for (int j = 0; j < 3; ++j) a[0 + j] = -a[0 + j];
  }
  if (flip_y) {
    for (int j = 0; j < 3; ++j) a[3 + j] = -a[3 + j];
  }
  PointTransform t;
  t.linear = a;
  t.translation = {0.0, 0.0, tz};
  return t;
}

std::vector<PointTransform> make_tta_set() {
  std::vector<PointTransform> set;
  const auto add = [&set](std::string name, PointTransform t) {
    t.name = std::move(name);
    set.push_back(std::move(t));
  };
  add("identity", make_transform(1, 0, 0, 0, 0, false, false));
  add("flip_xz", make_transform(1, 0, 0, 0, 0, false, true));   // reflect y
  add("flip_yz", make_transform(1, 0, 0, 0, 0, true, false));   // reflect x
  add("scale_0.95", make_transform(0.95, 0, 0, 0, 0, false, false));
  add("scale_1.05", make_transform(1.05, 0, 0, 0, 0, false, false));
  for (double deg : {22.5, -22.5, 45.0, -45.0, 135.0, -135.0, 157.5, -157.5, 180.0}) {
    add("yaw_" + std::to_string(deg), make_transform(1, deg * kDeg, 0, 0, 0, false, false));
  }
  for (double deg : {8.0, -8.0}) {
    add("pitch_" + std::to_string(deg), make_transform(1, 0, deg * kDeg, 0, 0, false, false));
  }
  for (double deg : {5.0, -5.0}) {
    add("roll_" + std::to_string(deg), make_transform(1, 0, 0, deg * kDeg, 0, false, false));
  }
  add("tz_+0.2", make_transform(1, 0, 0, 0, 0.2, false, false));
  add("tz_-0.2", make_transform(1, 0, 0, 0, -0.2, false, false));
  return set;
}

ScoreMat tta_infer(const PointCloud& cloud, const InferenceFn& infer,
                   const std::vector<PointTransform>& transforms) {
  if (transforms.empty()) throw InputError("tta_infer: empty transform set");
  ScoreMat acc;
  for (const PointTransform& t : transforms) {
    ScoreMat s;
    try {
      s = infer(t.apply(cloud));
    } catch (const std::exception& e) {
      throw InternalError("tta_infer: variant '" + t.name + "' failed: " + e.what());
    }
    if (acc.data.empty()) {
      acc = std::move(s);
    } else {
      if (s.rows != acc.rows || s.cols != acc.cols) {
        throw InternalError("tta_infer: variant '" + t.name + "' returned a mismatched shape");
      }
      for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += s.data[i];
    }
  }
  const double inv = 1.0 / static_cast<double>(transforms.size());
  for (double& v : acc.data) v *= inv;
  return acc;
}

ScoreMat ensemble_scores(const std::vector<ScoreMat>& scores) {
  if (scores.empty()) throw InputError("ensemble_scores: no inputs");
  ScoreMat acc = scores.front();
  for (std::size_t m = 1; m < scores.size(); ++m) {
    if (scores[m].rows != acc.rows || scores[m].cols != acc.cols) {
      throw InputError("ensemble_scores: shape mismatch at input " + std::to_string(m));
    }
    for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += scores[m].data[i];
  }
  const double inv = 1.0 / static_cast<double>(scores.size());
  for (double& v : acc.data) v *= inv;
  return acc;
}

}  // namespace voxmt
