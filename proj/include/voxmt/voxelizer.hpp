#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "voxmt/tensor.hpp"

namespace voxmt {

struct Point {
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;
  float intensity = 0.0f;  // [0, 1]
  float dt = 0.0f;         // seconds relative to the current frame, <= 0
};

struct PointCloud {
  std::vector<Point> points;

  std::size_t size() const { return points.size(); }
};

struct VoxelConfig {
  std::array<double, 3> range_min{};
  std::array<double, 3> range_max{};
  std::array<double, 3> voxel_size{};

  // Derived voxel counts per axis (W, H, D). Throws ConfigError when the
  // extent is not an integral multiple of the voxel size (tolerance 1e-9).
  std::array<int32_t, 3> grid_dims() const;
  void validate() const;
};

constexpr int32_t kOutOfRange = -1;

struct PointVoxelMap {
  std::vector<int32_t> point_to_voxel;            // voxel row or kOutOfRange, length N
  std::vector<Coord> voxel_coords;                // unique, sorted by (iz, iy, ix)
  std::vector<std::vector<int32_t>> voxel_point_lists;  // per voxel, point indices
};

// Half-open cells [min, min + size): index = floor((coord - min) / size).
PointVoxelMap voxelize(const PointCloud& cloud, const VoxelConfig& cfg);

struct VFEConfig {
  int32_t out_channels = 16;
  std::vector<float> mlp_weights;  // in_features x out_channels, row-major
  std::vector<float> mlp_bias;     // out_channels
};

// Per-point feature vector fed to the VFE MLP:
// [x, y, z, intensity, dt, x-cx, y-cy, z-cz, x-vx, y-vy, z-vz]
// with (cx,cy,cz) the voxel's point centroid and (vx,vy,vz) the cell center.
constexpr int32_t kVfeInFeatures = 11;

// Linear + ReLU per point, componentwise max over each voxel's points.
SparseTensor vfe_forward(const PointCloud& cloud, const PointVoxelMap& map,
                         const VoxelConfig& vcfg, const VFEConfig& cfg);

// Projects voxel-level score rows back to points; out-of-range points get a
// one-hot row at fallback_class.
ScoreMat devoxelize(const SparseTensor& voxel_scores, const PointVoxelMap& map,
                    int32_t fallback_class);

}  // namespace voxmt
