#include "voxmt/weightstore.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "voxmt/errors.hpp"

namespace voxmt {

namespace {

constexpr char kMagic[8] = {'V', 'O', 'X', 'M', 'T', 'W', 'T', '1'};

template <typename T>
void write_le(std::ostream& os, T v) {
  // Little-endian host assumed (x86-64 / aarch64).
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

std::string dims_str(const std::vector<uint32_t>& dims) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
  os << ")";
  return os.str();
}

}  // namespace

void WeightStore::put(const std::string& name, std::vector<uint32_t> dims,
                      std::vector<float> data) {
  std::size_t n = 1;
  for (uint32_t d : dims) n *= d;
  if (n != data.size()) {
    throw ConfigError("weight tensor '" + name + "': payload size " +
                      std::to_string(data.size()) + " does not match dims " + dims_str(dims));
  }
  tensors_[name] = Tensor{std::move(dims), std::move(data)};
}

const WeightStore::Tensor& WeightStore::get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ConfigError("missing weight tensor '" + name + "'");
  return it->second;
}

const WeightStore::Tensor& WeightStore::get(const std::string& name,
                                            const std::vector<uint32_t>& expected_dims) const {
  const Tensor& t = get(name);
  if (t.dims != expected_dims) {
    throw ConfigError("weight tensor '" + name + "': dims " + dims_str(t.dims) + ", expected " +
                      dims_str(expected_dims));
  }
  return t;
}

void WeightStore::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open '" + path + "' for writing");
  os.write(kMagic, sizeof(kMagic));
  write_le<uint32_t>(os, static_cast<uint32_t>(tensors_.size()));
  for (const auto& [name, t] : tensors_) {
    write_le<uint16_t>(os, static_cast<uint16_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_le<uint8_t>(os, static_cast<uint8_t>(t.dims.size()));
    for (uint32_t d : t.dims) write_le<uint32_t>(os, d);
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  }
  if (!os) throw InputError("write failed for '" + path + "'");
}

WeightStore WeightStore::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open '" + path + "'");
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw InputError("'" + path + "' is not a WTS1 weight file");
  }
  WeightStore ws;
  uint32_t count = read_le<uint32_t>(is);
  for (uint32_t e = 0; e < count; ++e) {
    uint16_t name_len = read_le<uint16_t>(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    uint8_t rank = read_le<uint8_t>(is);
    std::vector<uint32_t> dims(rank);
    std::size_t n = 1;
    for (uint8_t r = 0; r < rank; ++r) {
      dims[r] = read_le<uint32_t>(is);
      n *= dims[r];
    }
    std::vector<float> data(n);
    is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(n * sizeof(float)));
    if (!is) throw InputError("truncated WTS1 file '" + path + "'");
    ws.put(name, std::move(dims), std::move(data));
  }
  return ws;
}

}  // namespace voxmt
