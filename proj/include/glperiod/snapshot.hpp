#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "glperiod/error.hpp"
#include "glperiod/field.hpp"

namespace glperiod {

// Field snapshot file, all integers and floats little-endian, no padding:
//
//   offset  size  content
//   0       4     magic "GLPF"
//   4       4     u32 version (= 1)
//   8       4     u32 dim
//   12      4     u32 n_per_axis
//   16      8     f64 box length L
//   24      1     u8 representation (0 physical, 1 frequency)
//   25      16*N  N = n^dim pairs (re, im) as f64, in the Grid storage order
//
// The dealias fraction is not stored; readers take the grid default.

inline constexpr std::array<char, 4> kSnapshotMagic{'G', 'L', 'P', 'F'};
inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeaderBytes = 25;

namespace detail {

template <typename T>
void put_le(std::vector<unsigned char>& buf, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t b = 0; b < sizeof(T); ++b) buf.push_back(static_cast<unsigned char>(bits >> (8 * b)));
}

template <typename T>
T get_le(const unsigned char* p) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) bits |= static_cast<U>(p[b]) << (8 * b);
  return std::bit_cast<T>(bits);
}

}  // namespace detail

inline std::vector<unsigned char> encode_snapshot(const SpectralField& field) {
  const GridConfig& cfg = field.grid().config();
  std::vector<unsigned char> buf;
  buf.reserve(kSnapshotHeaderBytes + 16 * field.size());
  buf.insert(buf.end(), kSnapshotMagic.begin(), kSnapshotMagic.end());
  detail::put_le(buf, kSnapshotVersion);
  detail::put_le(buf, static_cast<std::uint32_t>(cfg.dim));
  detail::put_le(buf, static_cast<std::uint32_t>(cfg.n_per_axis));
  detail::put_le(buf, cfg.box_length);
  buf.push_back(static_cast<unsigned char>(field.representation()));
  for (const auto& z : field.data()) {
    detail::put_le(buf, z.real());
    detail::put_le(buf, z.imag());
  }
  return buf;
}

/// Decodes a snapshot. When `grid` is given the header must match it and the
/// field is attached to that grid; otherwise a grid is built from the header.
inline SpectralField decode_snapshot(const std::vector<unsigned char>& buf, GridPtr grid = nullptr) {
  if (buf.size() < kSnapshotHeaderBytes || std::memcmp(buf.data(), kSnapshotMagic.data(), 4) != 0)
    throw IoError("not a GLPF snapshot");
  const auto version = detail::get_le<std::uint32_t>(buf.data() + 4);
  if (version != kSnapshotVersion) throw IoError("unsupported GLPF version " + std::to_string(version));
  GridConfig cfg;
  cfg.dim = static_cast<int>(detail::get_le<std::uint32_t>(buf.data() + 8));
  cfg.n_per_axis = static_cast<int>(detail::get_le<std::uint32_t>(buf.data() + 12));
  cfg.box_length = detail::get_le<double>(buf.data() + 16);
  const auto rep_flag = buf[24];
  if (rep_flag > 1) throw IoError("bad representation flag in GLPF header");
  if (grid) {
    const GridConfig& g = grid->config();
    if (g.dim != cfg.dim || g.n_per_axis != cfg.n_per_axis || g.box_length != cfg.box_length)
      throw GridMismatch("snapshot header does not match the expected grid");
  } else {
    grid = make_grid(cfg);
  }
  const std::size_t n = grid->size();
  if (buf.size() != kSnapshotHeaderBytes + 16 * n) throw IoError("GLPF payload has the wrong length");
  std::vector<Complex> data(n);
  const unsigned char* p = buf.data() + kSnapshotHeaderBytes;
  for (std::size_t i = 0; i < n; ++i, p += 16)
    data[i] = {detail::get_le<double>(p), detail::get_le<double>(p + 8)};
  return SpectralField(grid, static_cast<Representation>(rep_flag), std::move(data));
}

inline void write_snapshot(const std::filesystem::path& path, const SpectralField& field) {
  const auto buf = encode_snapshot(field);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("short write to " + path.string());
}

inline SpectralField read_snapshot(const std::filesystem::path& path, GridPtr grid = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_snapshot(buf, std::move(grid));
}

}  // namespace glperiod
