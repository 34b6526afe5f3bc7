#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "voxmt/tensor.hpp"
#include "voxmt/voxelizer.hpp"

namespace voxmt {

// Rigid/scale point transform: p' = A p + t, with an exact analytic inverse.
struct PointTransform {
  std::string name;
  std::array<double, 9> linear{1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major 3x3
  std::array<double, 3> translation{0, 0, 0};

  std::array<double, 3> apply(const std::array<double, 3>& p) const;
  PointTransform inverse() const;
  PointCloud apply(const PointCloud& cloud) const;
};

PointTransform compose(const PointTransform& outer, const PointTransform& inner);

// Transforms applied in the order scale -> rotate (yaw * pitch * roll) ->
// translate; flips are standalone reflections.
PointTransform make_transform(double scale, double yaw, double pitch, double roll, double tz,
                              bool flip_x, bool flip_y);

// Default 20-variant set: identity, xz/yz-plane flips, global scales 0.95 and
// 1.05, yaw rotations +-22.5/+-45/+-135/+-157.5/180 deg, pitch +-8 deg, roll
// +-5 deg, z translations +-0.2 m.
std::vector<PointTransform> make_tta_set();

using InferenceFn = std::function<ScoreMat(const PointCloud&)>;

// Runs inference per variant and arithmetic-means the per-point score rows
// (rigid transforms preserve point order, so rows align by identity).
ScoreMat tta_infer(const PointCloud& cloud, const InferenceFn& infer,
                   const std::vector<PointTransform>& transforms);

// Elementwise mean of same-shape score matrices.
ScoreMat ensemble_scores(const std::vector<ScoreMat>& scores);

}  // namespace voxmt
