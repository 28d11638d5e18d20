#include "igt/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "igt/errors.hpp"

namespace igt {

namespace {

constexpr char kMagic[8] = {'I', 'G', 'T', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put_le(std::ostream& os, T value) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw ParseError("truncated checkpoint");
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

std::string get_bytes(std::istream& is, std::uint32_t len) {
  std::string s(len, '\0');
  if (len && !is.read(s.data(), len)) throw ParseError("truncated checkpoint");
  return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const std::string& metadata,
                     const ParamSet& params) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write checkpoint " + path.string());
  os.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(os, kVersion);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(metadata.size()));
  os.write(metadata.data(), static_cast<std::streamsize>(metadata.size()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(params.entries().size()));
  for (const auto& [name, value] : params.entries()) {
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(value.rank()));
    for (auto d : value.shape()) put_le<std::uint64_t>(os, d);
    for (double v : value.data()) put_le<double>(os, v);
  }
  if (!os) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint " + path.string());
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw ParseError("not a checkpoint file: " + path.string());
  }
  if (auto v = get_le<std::uint32_t>(is); v != kVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(v));
  }
  Checkpoint ckpt;
  ckpt.metadata = get_bytes(is, get_le<std::uint32_t>(is));
  const auto count = get_le<std::uint32_t>(is);
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string name = get_bytes(is, get_le<std::uint32_t>(is));
    const auto rank = get_le<std::uint32_t>(is);
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(get_le<std::uint64_t>(is));
    std::vector<double> values(shape_numel(shape));
    for (auto& v : values) v = get_le<double>(is);
    ckpt.arrays.emplace_back(std::move(name), Tensor::from(shape, std::move(values)));
  }
  return ckpt;
}

void restore_params(const Checkpoint& ckpt, ParamSet& params) {
  for (const auto& [name, value] : params.entries()) {
    auto it = std::find_if(ckpt.arrays.begin(), ckpt.arrays.end(),
                           [&](const auto& a) { return a.first == name; });
    if (it == ckpt.arrays.end()) throw ConfigError("checkpoint lacks parameter " + name);
    if (it->second.shape() != value.shape()) {
      throw ConfigError("checkpoint parameter " + name + " has shape " +
                        shape_str(it->second.shape()) + ", model expects " +
                        shape_str(value.shape()));
    }
    Tensor dst = value;
    auto src = it->second.data();
    std::copy(src.begin(), src.end(), dst.mutable_data().begin());
  }
}

}  // namespace igt
