#include "voxmt/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "voxmt/errors.hpp"

namespace voxmt {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open '" + path + "' for writing");
  return os;
}

std::ifstream open_in(const std::string& path, const char* magic) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open '" + path + "'");
  char buf[8];
  is.read(buf, 8);
  if (!is || std::memcmp(buf, magic, 8) != 0) {
    throw InputError("'" + path + "' does not start with magic " + std::string(magic, 8));
  }
  return is;
}

uint32_t read_u32(std::istream& is) {
  uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

void write_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }

void write_ids(std::ostream& os, const std::vector<int32_t>& ids) {
  for (int32_t v : ids) write_u32(os, static_cast<uint32_t>(v));
}

std::vector<int32_t> read_ids(std::istream& is, uint32_t n) {
  std::vector<int32_t> out(n);
  for (uint32_t i = 0; i < n; ++i) out[i] = static_cast<int32_t>(read_u32(is));
  return out;
}

}  // namespace

void write_pcb(const std::string& path, const PointCloud& cloud) {
  std::ofstream os = open_out(path);
  os.write("VOXMTPC1", 8);
  write_u32(os, static_cast<uint32_t>(cloud.size()));
  for (const Point& p : cloud.points) {
    const float rec[5] = {p.x, p.y, p.z, p.intensity, p.dt};
    os.write(reinterpret_cast<const char*>(rec), sizeof(rec));
  }
  if (!os) throw InputError("write failed for '" + path + "'");
}

PointCloud read_pcb(const std::string& path) {
  std::ifstream is = open_in(path, "VOXMTPC1");
  const uint32_t n = read_u32(is);
  PointCloud cloud;
  cloud.points.resize(n);
  for (uint32_t i = 0; i < n; ++i) {
    float rec[5];
    is.read(reinterpret_cast<char*>(rec), sizeof(rec));
    cloud.points[i] = Point{rec[0], rec[1], rec[2], rec[3], rec[4]};
  }
  if (!is) throw InputError("truncated PCB1 file '" + path + "'");
  return cloud;
}

void write_lbl(const std::string& path, const LabelSet& labels) {
  std::ofstream os = open_out(path);
  os.write("VOXMTLB1", 8);
  write_u32(os, static_cast<uint32_t>(labels.semantic.size()));
  write_ids(os, labels.semantic);
  write_ids(os, labels.instance);
  if (!os) throw InputError("write failed for '" + path + "'");
}

LabelSet read_lbl(const std::string& path) {
  std::ifstream is = open_in(path, "VOXMTLB1");
  const uint32_t n = read_u32(is);
  LabelSet out;
  out.semantic = read_ids(is, n);
  out.instance = read_ids(is, n);
  if (!is) throw InputError("truncated LBL1 file '" + path + "'");
  return out;
}

void write_pan(const std::string& path, const PanopticLabel& labels) {
  std::ofstream os = open_out(path);
  os.write("VOXMTPN1", 8);
  write_u32(os, static_cast<uint32_t>(labels.semantic.size()));
  write_ids(os, labels.semantic);
  write_ids(os, labels.instance);
  if (!os) throw InputError("write failed for '" + path + "'");
}

PanopticLabel read_pan(const std::string& path) {
  std::ifstream is = open_in(path, "VOXMTPN1");
  const uint32_t n = read_u32(is);
  PanopticLabel out;
  out.semantic = read_ids(is, n);
  out.instance = read_ids(is, n);
  if (!is) throw InputError("truncated PAN1 file '" + path + "'");
  return out;
}

void write_boxes(const std::string& path, const std::vector<Box3D>& boxes) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot open '" + path + "' for writing");
  os.precision(17);
  for (const Box3D& b : boxes) {
    os << b.cx << ',' << b.cy << ',' << b.cz << ',' << b.l << ',' << b.w << ',' << b.h << ','
       << b.yaw << ',' << b.class_id << ',' << b.score << '\n';
  }
  if (!os) throw InputError("write failed for '" + path + "'");
}

std::vector<Box3D> read_boxes(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open '" + path + "'");
  std::vector<Box3D> boxes;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    Box3D b;
    char comma;
    if (!(ls >> b.cx >> comma >> b.cy >> comma >> b.cz >> comma >> b.l >> comma >> b.w >> comma >>
          b.h >> comma >> b.yaw >> comma >> b.class_id >> comma >> b.score)) {
      throw InputError("'" + path + "': malformed BOX1 line " + std::to_string(lineno));
    }
    boxes.push_back(b);
  }
  return boxes;
}

}  // namespace voxmt
