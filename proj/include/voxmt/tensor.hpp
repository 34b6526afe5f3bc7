#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace voxmt {

// Voxel coordinate (ix, iy, iz).
using Coord = std::array<int32_t, 3>;

// Canonical ordering: lexicographic by (iz, iy, ix).
inline bool coord_less(const Coord& a, const Coord& b) {
  if (a[2] != b[2]) return a[2] < b[2];
  if (a[1] != b[1]) return a[1] < b[1];
  return a[0] < b[0];
}

// Sparse voxel tensor: M active coordinates with an M x C feature matrix.
struct SparseTensor {
  std::vector<Coord> coords;
  std::vector<float> features;  // row-major, size() == coords.size() * channels
  int32_t channels = 0;
  std::array<int32_t, 3> grid_dims{0, 0, 0};  // (W, H, D) at the current stride
  int32_t stride = 1;                         // power of two relative to full resolution

  std::size_t size() const { return coords.size(); }
  float* row(std::size_t i) { return features.data() + i * static_cast<std::size_t>(channels); }
  const float* row(std::size_t i) const {
    return features.data() + i * static_cast<std::size_t>(channels);
  }
};

// Dense C x H x W BEV plane, row-major per channel.
struct DenseBEV {
  int32_t channels = 0;
  int32_t height = 0;
  int32_t width = 0;
  std::vector<float> data;  // index (c * height + y) * width + x

  float& at(int32_t c, int32_t y, int32_t x) {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  float at(int32_t c, int32_t y, int32_t x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
};

inline DenseBEV make_bev(int32_t c, int32_t h, int32_t w) {
  DenseBEV b;
  b.channels = c;
  b.height = h;
  b.width = w;
  b.data.assign(static_cast<std::size_t>(c) * h * w, 0.0f);
  return b;
}

// Dense 3D volume for the test oracle path.
struct DenseVolume {
  int32_t channels = 0;
  std::array<int32_t, 3> dims{0, 0, 0};  // (W, H, D)
  std::vector<float> data;               // index ((c * D + z) * H + y) * W + x

  float& at(int32_t c, int32_t x, int32_t y, int32_t z) {
    return data[((static_cast<std::size_t>(c) * dims[2] + z) * dims[1] + y) * dims[0] + x];
  }
  float at(int32_t c, int32_t x, int32_t y, int32_t z) const {
    return data[((static_cast<std::size_t>(c) * dims[2] + z) * dims[1] + y) * dims[0] + x];
  }
};

inline DenseVolume make_volume(int32_t c, std::array<int32_t, 3> dims) {
  DenseVolume v;
  v.channels = c;
  v.dims = dims;
  v.data.assign(static_cast<std::size_t>(c) * dims[0] * dims[1] * dims[2], 0.0f);
  return v;
}

// Packs a coordinate into a dense 64-bit key: ((iz*H)+iy)*W+ix.
inline int64_t pack_coord(const Coord& c, const std::array<int32_t, 3>& dims) {
  return (static_cast<int64_t>(c[2]) * dims[1] + c[1]) * dims[0] + c[0];
}

inline bool in_grid(const Coord& c, const std::array<int32_t, 3>& dims) {
  return c[0] >= 0 && c[0] < dims[0] && c[1] >= 0 && c[1] < dims[1] && c[2] >= 0 && c[2] < dims[2];
}

// Open-addressed hash map from packed coordinate keys to row indices.
// Keys are non-negative by construction; -1 marks an empty slot.
class CoordMap {
 public:
  explicit CoordMap(std::size_t expected = 16) {
    std::size_t cap = 16;
    while (cap < expected * 2) cap <<= 1;
    keys_.assign(cap, kEmpty);
    vals_.resize(cap);
    mask_ = cap - 1;
  }

  void insert(int64_t key, int32_t value) {
    if ((count_ + 1) * 2 > keys_.size()) grow();
    std::size_t slot = probe(key);
    if (keys_[slot] == kEmpty) {
      keys_[slot] = key;
      ++count_;
    }
    vals_[slot] = value;
  }

  // Returns the row index or -1.
  int32_t find(int64_t key) const {
    std::size_t slot = probe(key);
    return keys_[slot] == kEmpty ? -1 : vals_[slot];
  }

  std::size_t size() const { return count_; }

 private:
  static constexpr int64_t kEmpty = -1;

  static std::size_t mix(int64_t key) {
    uint64_t x = static_cast<uint64_t>(key);
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return static_cast<std::size_t>(x ^ (x >> 31));
  }

  std::size_t probe(int64_t key) const {
    std::size_t slot = mix(key) & mask_;
    while (keys_[slot] != kEmpty && keys_[slot] != key) slot = (slot + 1) & mask_;
    return slot;
  }

  void grow() {
    std::vector<int64_t> old_keys = std::move(keys_);
    std::vector<int32_t> old_vals = std::move(vals_);
    keys_.assign(old_keys.size() * 2, kEmpty);
    vals_.assign(old_vals.size() * 2, 0);
    mask_ = keys_.size() - 1;
    count_ = 0;
    for (std::size_t i = 0; i < old_keys.size(); ++i) {
      if (old_keys[i] != kEmpty) insert(old_keys[i], old_vals[i]);
    }
  }

  std::vector<int64_t> keys_;
  std::vector<int32_t> vals_;
  std::size_t mask_ = 0;
  std::size_t count_ = 0;
};

// Row-major double matrix for score containers (S_1st, S_2nd, S_final, ...).
struct ScoreMat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  ScoreMat() = default;
  ScoreMat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
};

}  // namespace voxmt
