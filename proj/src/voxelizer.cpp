#include "voxmt/voxelizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "voxmt/errors.hpp"
#include "voxmt/kernels.hpp"

namespace voxmt {

std::array<int32_t, 3> VoxelConfig::grid_dims() const {
  std::array<int32_t, 3> dims{};
  for (int a = 0; a < 3; ++a) {
    const double extent = range_max[a] - range_min[a];
    const double cells = extent / voxel_size[a];
    const double rounded = std::round(cells);
    if (std::abs(cells - rounded) > 1e-9 || rounded < 1.0) {
      throw ConfigError("voxel grid axis " + std::to_string(a) + ": extent " +
                        std::to_string(extent) + " is not an integral multiple of voxel size " +
                        std::to_string(voxel_size[a]));
    }
    dims[a] = static_cast<int32_t>(rounded);
  }
  return dims;
}

void VoxelConfig::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (!(voxel_size[a] > 0.0)) throw ConfigError("voxel size must be positive");
    if (!(range_max[a] > range_min[a])) throw ConfigError("range max must exceed range min");
  }
  (void)grid_dims();
}

PointVoxelMap voxelize(const PointCloud& cloud, const VoxelConfig& cfg) {
  cfg.validate();
  const auto dims = cfg.grid_dims();
  const std::size_t n = cloud.size();

  PointVoxelMap map;
  map.point_to_voxel.assign(n, kOutOfRange);

  std::vector<Coord> point_cell(n);
  std::vector<int32_t> in_range;
  in_range.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = cloud.points[i];
    const double c[3] = {p.x, p.y, p.z};
    if (!std::isfinite(c[0]) || !std::isfinite(c[1]) || !std::isfinite(c[2])) {
      throw InputError("non-finite coordinate at point " + std::to_string(i));
    }
    Coord idx{};
    bool ok = true;
    for (int a = 0; a < 3; ++a) {
      const double f = std::floor((c[a] - cfg.range_min[a]) / cfg.voxel_size[a]);
      if (f < 0.0 || f >= static_cast<double>(dims[a])) {
        ok = false;
        break;
      }
      idx[a] = static_cast<int32_t>(f);
    }
    if (ok) {
      point_cell[i] = idx;
      in_range.push_back(static_cast<int32_t>(i));
    }
  }

  // Deterministic voxel ordering: sort occupied cells by (iz, iy, ix).
  std::vector<int32_t> order = in_range;
  std::stable_sort(order.begin(), order.end(), [&](int32_t a, int32_t b) {
    return coord_less(point_cell[a], point_cell[b]);
  });

  for (int32_t pi : order) {
    if (map.voxel_coords.empty() || map.voxel_coords.back() != point_cell[pi]) {
      map.voxel_coords.push_back(point_cell[pi]);
      map.voxel_point_lists.emplace_back();
    }
    const int32_t row = static_cast<int32_t>(map.voxel_coords.size()) - 1;
    map.point_to_voxel[pi] = row;
    map.voxel_point_lists[row].push_back(pi);
  }
  return map;
}

SparseTensor vfe_forward(const PointCloud& cloud, const PointVoxelMap& map,
                         const VoxelConfig& vcfg, const VFEConfig& cfg) {
  if (cfg.out_channels <= 0) throw ConfigError("VFE out_channels must be positive");
  const std::size_t expected = static_cast<std::size_t>(kVfeInFeatures) * cfg.out_channels;
  if (cfg.mlp_weights.size() != expected) {
    throw ConfigError("VFE weight shape mismatch: got " + std::to_string(cfg.mlp_weights.size()) +
                      " values, expected " + std::to_string(expected));
  }
  if (cfg.mlp_bias.size() != static_cast<std::size_t>(cfg.out_channels)) {
    throw ConfigError("VFE bias length mismatch");
  }

  const std::size_t m = map.voxel_coords.size();
  const int32_t c_out = cfg.out_channels;
  SparseTensor out;
  out.coords = map.voxel_coords;
  out.channels = c_out;
  out.grid_dims = vcfg.grid_dims();
  out.stride = 1;
  out.features.assign(m * static_cast<std::size_t>(c_out), 0.0f);

  std::vector<float> point_feat(kVfeInFeatures);
  std::vector<float> hidden(c_out);
  for (std::size_t v = 0; v < m; ++v) {
    const auto& pts = map.voxel_point_lists[v];
    double cx = 0.0, cy = 0.0, cz = 0.0;
    for (int32_t pi : pts) {
      cx += cloud.points[pi].x;
      cy += cloud.points[pi].y;
      cz += cloud.points[pi].z;
    }
    const double inv = pts.empty() ? 0.0 : 1.0 / static_cast<double>(pts.size());
    cx *= inv;
    cy *= inv;
    cz *= inv;
    const Coord& cell = map.voxel_coords[v];
    const double vx = vcfg.range_min[0] + (cell[0] + 0.5) * vcfg.voxel_size[0];
    const double vy = vcfg.range_min[1] + (cell[1] + 0.5) * vcfg.voxel_size[1];
    const double vz = vcfg.range_min[2] + (cell[2] + 0.5) * vcfg.voxel_size[2];

    float* voxel_row = out.row(v);
    bool first = true;
    for (int32_t pi : pts) {
      const Point& p = cloud.points[pi];
      point_feat = {p.x,
                    p.y,
                    p.z,
                    p.intensity,
                    p.dt,
                    static_cast<float>(p.x - cx),
                    static_cast<float>(p.y - cy),
                    static_cast<float>(p.z - cz),
                    static_cast<float>(p.x - vx),
                    static_cast<float>(p.y - vy),
                    static_cast<float>(p.z - vz)};
      std::copy(cfg.mlp_bias.begin(), cfg.mlp_bias.end(), hidden.begin());
      for (int32_t f = 0; f < kVfeInFeatures; ++f) {
        kernels::axpy(hidden.data(), cfg.mlp_weights.data() + static_cast<std::size_t>(f) * c_out,
                      point_feat[f], static_cast<std::size_t>(c_out));
      }
      kernels::relu(hidden.data(), static_cast<std::size_t>(c_out));
      if (first) {
        std::copy(hidden.begin(), hidden.end(), voxel_row);
        first = false;
      } else {
        kernels::emax(voxel_row, hidden.data(), static_cast<std::size_t>(c_out));
      }
    }
  }
  return out;
}

ScoreMat devoxelize(const SparseTensor& voxel_scores, const PointVoxelMap& map,
                    int32_t fallback_class) {
  if (voxel_scores.size() != map.voxel_coords.size()) {
    throw InternalError("devoxelize: voxel score rows (" + std::to_string(voxel_scores.size()) +
                        ") misaligned with voxel map (" + std::to_string(map.voxel_coords.size()) +
                        ")");
  }
  const std::size_t n = map.point_to_voxel.size();
  const std::size_t k = static_cast<std::size_t>(voxel_scores.channels);
  ScoreMat out(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    double* dst = out.row(i);
    const int32_t v = map.point_to_voxel[i];
    if (v == kOutOfRange) {
      dst[static_cast<std::size_t>(fallback_class)] = 1.0;
    } else {
      const float* src = voxel_scores.row(static_cast<std::size_t>(v));
      for (std::size_t c = 0; c < k; ++c) dst[c] = src[c];
    }
  }
  return out;
}

}  // namespace voxmt
