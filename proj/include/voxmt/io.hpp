#pragma once

#include <string>
#include <vector>

#include "voxmt/heads.hpp"
#include "voxmt/refine.hpp"
#include "voxmt/voxelizer.hpp"

namespace voxmt {

// "PCB1": magic "VOXMTPC1", u32 LE point count, then per point five LE f32
// (x, y, z, intensity, dt).
void write_pcb(const std::string& path, const PointCloud& cloud);
PointCloud read_pcb(const std::string& path);

struct LabelSet {
  std::vector<int32_t> semantic;
  std::vector<int32_t> instance;  // 0 = none
};

// "LBL1": magic "VOXMTLB1", u32 N, N x u32 semantic class, N x u32 instance.
void write_lbl(const std::string& path, const LabelSet& labels);
LabelSet read_lbl(const std::string& path);

// "PAN1": magic "VOXMTPN1", u32 N, N x u32 semantic, N x u32 instance.
void write_pan(const std::string& path, const PanopticLabel& labels);
PanopticLabel read_pan(const std::string& path);

// "BOX1": one CSV line per box: cx,cy,cz,l,w,h,yaw,class,score.
void write_boxes(const std::string& path, const std::vector<Box3D>& boxes);
std::vector<Box3D> read_boxes(const std::string& path);

}  // namespace voxmt
