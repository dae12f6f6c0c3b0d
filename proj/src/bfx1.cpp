#include "bilap/bfx1.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <istream>
#include <ostream>

namespace bilap::bfx1 {
namespace {

constexpr std::array<char, 4> kMagic = {'B', 'F', 'X', '1'};

template <typename UInt>
void put_le(std::ostream& os, UInt v) {
  std::array<char, sizeof(UInt)> bytes{};
  for (std::size_t i = 0; i < sizeof(UInt); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(bytes.data(), bytes.size());
}

template <typename UInt>
UInt get_le(std::istream& is) {
  std::array<unsigned char, sizeof(UInt)> bytes{};
  if (!is.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) throw FormatError("bfx1: truncated stream");
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

void write(std::ostream& os, const RealField& field) {
  os.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(os, kVersion);
  put_le<std::uint64_t>(os, 0);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(field.grid.dim()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(field.grid.points()));
  put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(field.grid.half_side()));
  for (Eigen::Index i = 0; i < field.values.size(); ++i)
    put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(field.values[i]));
  if (!os) throw FormatError("bfx1: write failed");
}

RealField read(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size())) throw FormatError("bfx1: truncated header");
  if (magic != kMagic) throw FormatError("bfx1: bad magic");
  const auto version = get_le<std::uint32_t>(is);
  if (version != kVersion) throw FormatError("bfx1: unsupported version " + std::to_string(version));
  get_le<std::uint64_t>(is);
  const auto d = get_le<std::uint32_t>(is);
  const auto n = get_le<std::uint32_t>(is);
  const double L = std::bit_cast<double>(get_le<std::uint64_t>(is));
  if (d < 1 || d > 16 || n > (1u << 20)) throw FormatError("bfx1: implausible grid header");
  Grid<double> grid(static_cast<int>(d), static_cast<int>(n), L);
  RealField field(grid);
  for (Eigen::Index i = 0; i < grid.size(); ++i) field.values[i] = std::bit_cast<double>(get_le<std::uint64_t>(is));
  if (!field.all_finite()) throw FormatError("bfx1: non-finite sample");
  return field;
}

void save(const std::filesystem::path& path, const RealField& field) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("bfx1: cannot open " + path.string() + " for writing");
  write(os, field);
}

RealField load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("bfx1: cannot open " + path.string());
  return read(is);
}

}  // namespace bilap::bfx1
