#include "hjsafe/hjvf.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace hjsafe {

namespace {

constexpr char kMagic[4] = {'H', 'J', 'V', 'F'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& os, T v) {
  unsigned char buf[sizeof(T)];
  auto u = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(buf, u.data(), sizeof(T));
  } else {
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = u[sizeof(T) - 1 - i];
  }
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  is.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!is) throw std::runtime_error("HJVF: truncated stream");
  std::array<unsigned char, sizeof(T)> u;
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(u.data(), buf, sizeof(T));
  } else {
    for (std::size_t i = 0; i < sizeof(T); ++i) u[i] = buf[sizeof(T) - 1 - i];
  }
  return std::bit_cast<T>(u);
}

}  // namespace

void write_hjvf(std::ostream& os, const ScalarField& field) {
  os.write(kMagic, 4);
  put_le<std::uint32_t>(os, kVersion);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(field.grid().ndims()));
  for (std::size_t d = 0; d < field.grid().ndims(); ++d) {
    const auto& dim = field.grid().dim(d);
    put_le<std::uint64_t>(os, dim.n);
    put_le<double>(os, dim.min);
    put_le<double>(os, dim.max);
  }
  for (double v : field.values()) put_le<double>(os, v);
  if (!os) throw std::runtime_error("HJVF: write failed");
}

void write_hjvf(const std::filesystem::path& path, const ScalarField& field) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("HJVF: cannot open " + path.string());
  write_hjvf(os, field);
}

ScalarField read_hjvf(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("HJVF: bad magic");
  const auto version = get_le<std::uint32_t>(is);
  if (version != kVersion)
    throw std::runtime_error("HJVF: unsupported version " + std::to_string(version));
  const auto ndims = get_le<std::uint32_t>(is);
  if (ndims == 0 || ndims > 32) throw std::runtime_error("HJVF: bad ndims");

  std::vector<GridDim> dims(ndims);
  for (auto& d : dims) {
    d.n = static_cast<std::size_t>(get_le<std::uint64_t>(is));
    d.min = get_le<double>(is);
    d.max = get_le<double>(is);
  }
  Grid grid(std::move(dims));
  std::vector<double> values(grid.size());
  for (auto& v : values) {
    v = get_le<double>(is);
    if (!std::isfinite(v)) throw std::runtime_error("HJVF: non-finite value");
  }
  return {std::move(grid), std::move(values)};
}

ScalarField read_hjvf(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("HJVF: cannot open " + path.string());
  return read_hjvf(is);
}

}  // namespace hjsafe
