#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace crossfake {

struct TensorInfo {
  std::string dtype;  // F32, F16 or BF16
  std::vector<std::int64_t> shape;
  std::uint64_t begin = 0;  // byte offsets relative to the data section
  std::uint64_t end = 0;

  std::int64_t numel() const noexcept;
};

// Read-only view of a .safetensors file: 8-byte little-endian header length,
// a JSON header, then raw tensor bytes. Tensors are read on demand.
class SafetensorsFile {
 public:
  static SafetensorsFile open(const std::filesystem::path& path);

  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  const TensorInfo& info(const std::string& name) const;
  const std::map<std::string, TensorInfo>& tensors() const noexcept { return tensors_; }

  /// Reads a tensor converted to float32, row-major.
  std::vector<float> read(const std::string& name) const;

 private:
  std::filesystem::path path_;
  std::uint64_t data_offset_ = 0;
  std::map<std::string, TensorInfo> tensors_;
};

}  // namespace crossfake
