#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "forge/core/error.hpp"
#include "forge/layout/types.hpp"

namespace forge::io {

/// Binary layout grids.
///
///   offset  size  field
///   0       4     magic "MVRL"
///   4       2     version (u16, currently 1)
///   6       1     view (0 top, 1 front)
///   7       2     channels R (u16)
///   9       4     resolution D (u32)
///   13      ...   payload, channel-major then row-major
///
/// ".lay" payloads hold one class byte per cell, ".plf" payloads three
/// float32 probabilities per cell. All integers and floats are little-endian.
inline constexpr std::array<char, 4> kGridMagic{'M', 'V', 'R', 'L'};
inline constexpr std::uint16_t kGridVersion = 1;
inline constexpr std::size_t kGridHeaderSize = 13;

struct GridHeader {
  layout::View view = layout::View::Top;
  int channels = 0;
  int resolution = 0;
};

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return v;
}

inline void put_header(std::vector<std::uint8_t>& out, const GridHeader& h) {
  out.insert(out.end(), kGridMagic.begin(), kGridMagic.end());
  put_u16(out, kGridVersion);
  out.push_back(static_cast<std::uint8_t>(h.view));
  put_u16(out, static_cast<std::uint16_t>(h.channels));
  put_u32(out, static_cast<std::uint32_t>(h.resolution));
}

}  // namespace detail

inline GridHeader parse_grid_header(std::span<const std::uint8_t> in) {
  if (in.size() < 4 || std::memcmp(in.data(), kGridMagic.data(), 4) != 0) {
    throw Error(ErrorCode::FormatError, "bad magic, expected MVRL", 0);
  }
  if (in.size() < 6) throw Error(ErrorCode::FormatError, "truncated header", in.size());
  const std::uint16_t version = static_cast<std::uint16_t>(in[4] | (in[5] << 8));
  if (version != kGridVersion) {
    throw Error(ErrorCode::FormatError, "unsupported version " + std::to_string(version), 4);
  }
  if (in.size() < kGridHeaderSize) throw Error(ErrorCode::FormatError, "truncated header", in.size());
  if (in[6] > 1) throw Error(ErrorCode::FormatError, "bad view tag " + std::to_string(in[6]), 6);
  GridHeader h;
  h.view = static_cast<layout::View>(in[6]);
  h.channels = in[7] | (in[8] << 8);
  const std::uint32_t d = detail::get_u32(in, 9);
  if (h.channels == 0) throw Error(ErrorCode::FormatError, "zero channels", 7);
  if (d == 0 || d > 65536) throw Error(ErrorCode::FormatError, "bad resolution " + std::to_string(d), 9);
  h.resolution = static_cast<int>(d);
  return h;
}

inline std::vector<std::uint8_t> encode_layout(const layout::LayoutStack& s) {
  std::vector<std::uint8_t> out;
  out.reserve(kGridHeaderSize + s.cells().size());
  detail::put_header(out, {s.view(), s.channels(), s.resolution()});
  for (auto c : s.cells()) out.push_back(static_cast<std::uint8_t>(c));
  return out;
}

inline layout::LayoutStack decode_layout(std::span<const std::uint8_t> in, int frame_index = 0) {
  const GridHeader h = parse_grid_header(in);
  layout::LayoutStack s(h.view, h.channels, h.resolution, frame_index);
  const std::size_t need = kGridHeaderSize + s.cells().size();
  if (in.size() < need) throw Error(ErrorCode::FormatError, "truncated payload", in.size());
  if (in.size() > need) throw Error(ErrorCode::FormatError, "trailing bytes", need);
  auto cells = s.cells();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::uint8_t b = in[kGridHeaderSize + i];
    if (b >= layout::kNumClasses) {
      throw Error(ErrorCode::FormatError, "bad class byte " + std::to_string(b), kGridHeaderSize + i);
    }
    cells[i] = static_cast<layout::CellClass>(b);
  }
  return s;
}

inline std::vector<std::uint8_t> encode_probabilities(const layout::ProbabilityStack& s) {
  std::vector<std::uint8_t> out;
  out.reserve(kGridHeaderSize + s.values().size() * 4);
  detail::put_header(out, {s.view(), s.channels(), s.resolution()});
  for (float v : s.values()) detail::put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

inline layout::ProbabilityStack decode_probabilities(std::span<const std::uint8_t> in, int frame_index = 0) {
  const GridHeader h = parse_grid_header(in);
  layout::ProbabilityStack s(h.view, h.channels, h.resolution, frame_index);
  const std::size_t need = kGridHeaderSize + s.values().size() * 4;
  if (in.size() < need) throw Error(ErrorCode::FormatError, "truncated payload", in.size());
  if (in.size() > need) throw Error(ErrorCode::FormatError, "trailing bytes", need);
  auto values = s.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::bit_cast<float>(detail::get_u32(in, kGridHeaderSize + 4 * i));
  }
  return s;
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

inline layout::LayoutStack load_layout(const std::filesystem::path& path, int frame_index = 0) {
  return decode_layout(read_bytes(path), frame_index);
}

inline void save_layout(const std::filesystem::path& path, const layout::LayoutStack& s) {
  write_bytes(path, encode_layout(s));
}

inline layout::ProbabilityStack load_probabilities(const std::filesystem::path& path, int frame_index = 0) {
  return decode_probabilities(read_bytes(path), frame_index);
}

inline void save_probabilities(const std::filesystem::path& path, const layout::ProbabilityStack& s) {
  write_bytes(path, encode_probabilities(s));
}

}  // namespace forge::io
