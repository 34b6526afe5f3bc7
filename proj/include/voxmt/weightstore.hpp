#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace voxmt {

// Named-tensor container with a bit-exact binary format ("WTS1") so that
// weights can be produced by external tooling:
//   magic "VOXMTWT1", u32 entry count, then per entry:
//   u16 name length, UTF-8 name, u8 rank, rank x u32 dims,
//   row-major little-endian f32 payload.
class WeightStore {
 public:
  struct Tensor {
    std::vector<uint32_t> dims;
    std::vector<float> data;

    std::size_t numel() const {
      std::size_t n = 1;
      for (uint32_t d : dims) n *= d;
      return n;
    }
  };

  void put(const std::string& name, std::vector<uint32_t> dims, std::vector<float> data);

  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }

  // Throws ConfigError naming the tensor when missing or mis-shaped.
  const Tensor& get(const std::string& name) const;
  const Tensor& get(const std::string& name, const std::vector<uint32_t>& expected_dims) const;

  std::size_t size() const { return tensors_.size(); }
  const std::map<std::string, Tensor>& tensors() const { return tensors_; }

  void save(const std::string& path) const;
  static WeightStore load(const std::string& path);

 private:
  std::map<std::string, Tensor> tensors_;
};

}  // namespace voxmt
