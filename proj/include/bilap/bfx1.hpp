#pragma once

// BFX1 field dump: 16-byte header ("BFX1", u32 version, 8 reserved zero
// bytes), then u32 d, u32 n, f64 L, then n^d f64 samples in row-major order.
// All integers and floats are little-endian.

#include "bilap/lattice.hpp"

#include <filesystem>
#include <iosfwd>

namespace bilap::bfx1 {

inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 16;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write(std::ostream& os, const RealField& field);
RealField read(std::istream& is);

void save(const std::filesystem::path& path, const RealField& field);
RealField load(const std::filesystem::path& path);

}  // namespace bilap::bfx1
