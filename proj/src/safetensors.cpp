#include "crossfake/safetensors.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "crossfake/error.hpp"
#include "crossfake/json_io.hpp"

namespace crossfake {
namespace {

float half_to_float(std::uint16_t h) {
  const std::uint32_t sign = static_cast<std::uint32_t>(h & 0x8000) << 16;
  std::uint32_t exp = (h >> 10) & 0x1F;
  std::uint32_t mant = h & 0x3FF;
  std::uint32_t bits;
  if (exp == 0) {
    if (mant == 0) {
      bits = sign;
    } else {
      exp = 127 - 15 + 1;
      while ((mant & 0x400) == 0) {
        mant <<= 1;
        --exp;
      }
      mant &= 0x3FF;
      bits = sign | (exp << 23) | (mant << 13);
    }
  } else if (exp == 0x1F) {
    bits = sign | 0x7F800000 | (mant << 13);
  } else {
    bits = sign | ((exp + 127 - 15) << 23) | (mant << 13);
  }
  return std::bit_cast<float>(bits);
}

std::size_t dtype_size(const std::string& dtype) {
  if (dtype == "F32") return 4;
  if (dtype == "F16" || dtype == "BF16") return 2;
  throw ConfigError(fmt::format("unsupported safetensors dtype '{}'", dtype));
}

}  // namespace

std::int64_t TensorInfo::numel() const noexcept {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

SafetensorsFile SafetensorsFile::open(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open '{}'", path.string()));
  unsigned char len_bytes[8];
  if (!in.read(reinterpret_cast<char*>(len_bytes), 8)) {
    throw ConfigError(fmt::format("'{}' is not a safetensors file", path.string()));
  }
  std::uint64_t header_len = 0;
  for (int i = 7; i >= 0; --i) header_len = (header_len << 8) | len_bytes[i];
  const auto file_size = std::filesystem::file_size(path);
  if (header_len > file_size - 8) {
    throw ConfigError(fmt::format("'{}': header length exceeds file size", path.string()));
  }
  std::string header(header_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_len));

  SafetensorsFile f;
  f.path_ = path;
  f.data_offset_ = 8 + header_len;
  Json j;
  try {
    j = Json::parse(header);
  } catch (const Json::parse_error& e) {
    throw ConfigError(fmt::format("'{}': bad header: {}", path.string(), e.what()));
  }
  for (const auto& [name, entry] : j.items()) {
    if (name == "__metadata__") continue;
    TensorInfo t;
    t.dtype = entry.at("dtype").get<std::string>();
    t.shape = entry.at("shape").get<std::vector<std::int64_t>>();
    const auto offsets = entry.at("data_offsets").get<std::vector<std::uint64_t>>();
    if (offsets.size() != 2 || offsets[1] < offsets[0] ||
        f.data_offset_ + offsets[1] > file_size ||
        offsets[1] - offsets[0] != static_cast<std::uint64_t>(t.numel()) * dtype_size(t.dtype)) {
      throw ConfigError(fmt::format("'{}': inconsistent entry for '{}'", path.string(), name));
    }
    t.begin = offsets[0];
    t.end = offsets[1];
    f.tensors_.emplace(name, std::move(t));
  }
  return f;
}

const TensorInfo& SafetensorsFile::info(const std::string& name) const {
  const auto it = tensors_.find(name);
  if (it == tensors_.end()) {
    throw ConfigError(fmt::format("'{}' has no tensor '{}'", path_.string(), name));
  }
  return it->second;
}

std::vector<float> SafetensorsFile::read(const std::string& name) const {
  const auto& t = info(name);
  std::ifstream in(path_, std::ios::binary);
  in.seekg(static_cast<std::streamoff>(data_offset_ + t.begin));
  std::vector<unsigned char> raw(t.end - t.begin);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw ConfigError(fmt::format("'{}': short read for '{}'", path_.string(), name));
  }
  std::vector<float> out(static_cast<std::size_t>(t.numel()));
  // Data is little-endian, as is every supported host.
  if (t.dtype == "F32") {
    std::memcpy(out.data(), raw.data(), raw.size());
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto h = static_cast<std::uint16_t>(raw[2 * i] | (raw[2 * i + 1] << 8));
      out[i] = t.dtype == "F16" ? half_to_float(h)
                                : std::bit_cast<float>(static_cast<std::uint32_t>(h) << 16);
    }
  }
  return out;
}

}  // namespace crossfake
