#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace ave {

/// How the grid's corner and cell size are to be read. ESRI headers do
/// not say; parse_terrain guesses (see below) and callers may override.
enum class GridCrs {
  Projected,   // UTM easting/northing metres in the scene's zone
  Geographic,  // degrees: x = lon, y = lat
};

/// ESRI ASCII grid. Values are row-major with row 0 the northernmost row.
/// Each value sits at its cell centre, which is what the mesh treats as a
/// node.
struct TerrainGrid {
  std::size_t ncols = 0;
  std::size_t nrows = 0;
  double xll_corner = 0.0;  // lower-left corner of the lower-left cell
  double yll_corner = 0.0;
  double cellsize = 0.0;
  double nodata = -9999.0;
  GridCrs crs = GridCrs::Projected;
  std::vector<double> values;

  double at(std::size_t col, std::size_t row) const { return values[row * ncols + col]; }
  bool is_nodata(std::size_t col, std::size_t row) const { return at(col, row) == nodata; }
  /// Grid-unit position of a node (cell centre).
  double node_x(std::size_t col) const { return xll_corner + (static_cast<double>(col) + 0.5) * cellsize; }
  double node_y(std::size_t row) const {
    return yll_corner + (static_cast<double>(nrows - row) - 0.5) * cellsize;
  }
  std::size_t nodata_count() const;

  friend bool operator==(const TerrainGrid&, const TerrainGrid&) = default;
};

/// Reads the six-line header (ncols, nrows, xllcorner|xllcenter,
/// yllcorner|yllcenter, cellsize, optional NODATA_value; keys are
/// case-insensitive) followed by nrows x ncols values.
///
/// A header whose corner lies within lon/lat bounds and whose cell size is
/// below 0.01 is taken as geographic; anything else as projected.
///
/// Throws ParseError ("line N: ...") on malformed headers and when the
/// value count differs from ncols x nrows (message names both counts).
TerrainGrid parse_terrain(std::string_view text);

}  // namespace ave
