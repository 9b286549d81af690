#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ave/geodesy.hpp"

namespace ave {

/// One OSM building way. ring is closed in the source; the duplicated
/// closing vertex is kept here and removed during normalization.
struct BuildingFootprint {
  std::int64_t osm_id = 0;
  std::vector<GeoCoord> ring;
  std::optional<double> height_m;
  std::optional<double> levels;
  std::optional<std::string> name;

  friend bool operator==(const BuildingFootprint&, const BuildingFootprint&) = default;
};

struct OverpassResult {
  std::vector<BuildingFootprint> footprints;
  std::vector<std::string> warnings;
};

/// Parses an Overpass JSON element list. Ways may carry an expanded
/// "geometry" array (`out geom;`) or node references resolved against
/// node elements in the same document. Only closed ways tagged building
/// (anything but "no") are kept; ways with fewer than three distinct
/// vertices are skipped with a warning.
///
/// Throws ParseError (with a JSON path) when the document itself is
/// malformed.
OverpassResult parse_overpass(std::string_view body);

/// "12.5", "12.5 m", "40 ft". nullopt when no leading number is present
/// or the value is not positive.
std::optional<double> parse_height_tag(std::string_view value);

/// height tag, else levels x 3.0 m, else the default (8.0 m).
double building_height(const BuildingFootprint& fp, double default_height = 8.0);

/// Overpass QL for all building ways in a south,west,north,east box, with
/// expanded geometry.
std::string overpass_query(double south, double west, double north, double east, int timeout_s = 25);

}  // namespace ave
