#pragma once

#include <cstdint>
#include <vector>

#include "voxmt/heads.hpp"
#include "voxmt/tensor.hpp"
#include "voxmt/voxelizer.hpp"
#include "voxmt/weightstore.hpp"

namespace voxmt {

constexpr int32_t kNotInBox = -1;  // the point-box sentinel

struct PointBoxIndex {
  std::vector<int32_t> ind;  // box index or kNotInBox, length N
};

// Maps thing classes to their global class ids; everything else is stuff.
struct ClassMap {
  std::vector<int32_t> thing_classes;  // global ids, position = thing index
  int32_t num_classes = 0;

  int32_t num_thing() const { return static_cast<int32_t>(thing_classes.size()); }
  // global id -> thing index, -1 for stuff
  std::vector<int32_t> thing_index() const;
  void validate() const;
};

// A point is inside a box iff, after translating by -center and rotating by
// -yaw about z, |x| <= l/2, |y| <= w/2, |z| <= h/2. Multi-box membership is
// resolved by the highest box score (ties: lowest box index).
PointBoxIndex assign_points(const PointCloud& cloud, const std::vector<Box3D>& boxes);

// Box-frame coordinates R(-yaw) * (p - center) for assigned points; rows for
// unassigned points are zero and flagged invalid via the index.
std::vector<std::array<double, 3>> local_transform(const PointCloud& cloud,
                                                   const std::vector<Box3D>& boxes,
                                                   const PointBoxIndex& index);

struct Stage2Scores {
  std::vector<double> s_point;  // N, (0,1); meaningful only for assigned points
  ScoreMat s_box;               // B x (K_thing + 1), simplex rows
};

// Shared per-point MLP over concat(local coords, decoder voxel features),
// max-pool aggregation per box, then a box MLP over concat(pooled, BEV
// features bilinearly sampled at the box center). Weight names stage2.*.
Stage2Scores second_stage_forward(const PointCloud& cloud, const std::vector<Box3D>& boxes,
                                  const PointBoxIndex& index, const PointVoxelMap& map,
                                  const SparseTensor& decoder_out, const DenseBEV& bev,
                                  const BevGeometry& geom, const WeightStore& weights,
                                  int32_t num_thing);

// S_2nd per assigned point: thing entries S_point * S_box, the trailing
// stuff entry S_point * S_box(empty) + (1 - S_point). Unassigned rows zero.
ScoreMat fuse_s2nd(const std::vector<double>& s_point, const ScoreMat& s_box,
                   const PointBoxIndex& index);

// S_final: unassigned points copy S_1st; assigned points get
// S_1st * S_2nd(empty) + S_2nd(class) for thing classes and
// S_1st * S_2nd(empty) for stuff classes.
ScoreMat fuse_final(const ScoreMat& s_1st, const ScoreMat& s_2nd, const PointBoxIndex& index,
                    const ClassMap& classes);

struct PanopticLabel {
  std::vector<int32_t> semantic;  // per point
  std::vector<int32_t> instance;  // 0 = stuff / unassigned
};

// Instance id b+1 for points assigned to box b whose semantic label equals
// the box class; everything else gets 0.
PanopticLabel panoptic_assign(const std::vector<int32_t>& semantic_labels,
                              const std::vector<Box3D>& boxes, const PointBoxIndex& index);

// Argmax per row, ties toward the lowest class id.
std::vector<int32_t> argmax_labels(const ScoreMat& scores);

}  // namespace voxmt
