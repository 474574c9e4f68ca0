#pragma once

#include <iosfwd>
#include <string>

#include "semopt/grid.hpp"
#include "semopt/types.hpp"

namespace semopt {

/// Field snapshot file.
///
/// A short ASCII header followed by `count` little-endian IEEE-754 binary64
/// values in the grid's global layout (component-major, axis 0 fastest):
///
///     semopt-field 1
///     dim 1
///     axis 0 elements 5 degree 8 extent -2 2 bc periodic
///     ncomp 1
///     count 40
///     end
///     <count * 8 bytes>
///
/// Extents are printed with 17 significant digits so they round-trip exactly.
struct Snapshot {
  GridSpec grid;
  int ncomp = 1;
  Vector values;
};

void write_snapshot(std::ostream& out, const Grid& grid, const Vector& values);
void write_snapshot(const std::string& path, const Grid& grid, const Vector& values);
Snapshot read_snapshot(std::istream& in);
Snapshot read_snapshot(const std::string& path);

}  // namespace semopt
