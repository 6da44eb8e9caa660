#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "affine_snn/error.hpp"

namespace affine_snn {

// Unsigned-byte IDX tensor (the MNIST container format).
struct IdxArray {
  std::vector<std::size_t> dims;
  std::vector<std::uint8_t> data;

  std::size_t count() const { return dims.empty() ? 0 : dims[0]; }
  std::size_t item_size() const {
    std::size_t n = 1;
    for (std::size_t i = 1; i < dims.size(); ++i) n *= dims[i];
    return n;
  }
};

inline constexpr std::uint32_t idx_label_magic = 0x00000801;
inline constexpr std::uint32_t idx_image_magic = 0x00000803;

inline IdxArray parse_idx(const std::vector<std::uint8_t>& bytes, const std::string& name = "buffer") {
  auto be32 = [&](std::size_t off) {
    return (std::uint32_t{bytes[off]} << 24) | (std::uint32_t{bytes[off + 1]} << 16) |
           (std::uint32_t{bytes[off + 2]} << 8) | std::uint32_t{bytes[off + 3]};
  };
  if (bytes.size() < 4) throw TruncatedFile(name + ": missing IDX header");
  const std::uint32_t magic = be32(0);
  if (magic != idx_label_magic && magic != idx_image_magic)
    throw BadMagic(name + ": unsupported IDX magic " + std::to_string(magic));
  const std::size_t ndims = magic & 0xFF;
  if (bytes.size() < 4 + 4 * ndims) throw TruncatedFile(name + ": IDX header cut short");
  IdxArray out;
  std::size_t total = 1;
  for (std::size_t i = 0; i < ndims; ++i) {
    out.dims.push_back(be32(4 + 4 * i));
    total *= out.dims.back();
  }
  const std::size_t offset = 4 + 4 * ndims;
  if (bytes.size() - offset < total)
    throw TruncatedFile(name + ": expected " + std::to_string(total) + " data bytes, found " +
                        std::to_string(bytes.size() - offset));
  out.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                  bytes.begin() + static_cast<std::ptrdiff_t>(offset + total));
  return out;
}

inline IdxArray load_idx(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_idx(bytes, path);
}

inline std::vector<std::uint8_t> encode_idx(const IdxArray& a) {
  if (a.dims.size() != 1 && a.dims.size() != 3) throw FormatError("IDX writer supports 1 or 3 dimensions");
  std::vector<std::uint8_t> out;
  auto put32 = [&](std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
  };
  put32(a.dims.size() == 1 ? idx_label_magic : idx_image_magic);
  for (std::size_t d : a.dims) put32(static_cast<std::uint32_t>(d));
  out.insert(out.end(), a.data.begin(), a.data.end());
  return out;
}

inline void write_idx(const std::string& path, const IdxArray& a) {
  const auto bytes = encode_idx(a);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace affine_snn
