#pragma once

#include <filesystem>
#include <iosfwd>

#include "hjsafe/grid.hpp"

namespace hjsafe {

// HJVF field container, version 1. Layout, all little-endian:
//   magic "HJVF" | version u32 | ndims u32 | per dim { n u64, min f64, max f64 }
//   | values f64, row-major, last dim fastest.
// Round-trips bit-exactly.

void write_hjvf(std::ostream& os, const ScalarField& field);
void write_hjvf(const std::filesystem::path& path, const ScalarField& field);

ScalarField read_hjvf(std::istream& is);
ScalarField read_hjvf(const std::filesystem::path& path);

}  // namespace hjsafe
